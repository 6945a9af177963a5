"""Text-to-vector embedding providers and similarity arithmetic.

Two providers sit behind one contract: a remote OpenAI-compatible
``/v1/embeddings`` endpoint for live runs, and a deterministic feature-hashing
embedder (unigrams + bigrams, signed hashing, unit L2 norm) for offline work.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._http import post_json_with_retry
from .errors import ConfigError, ProtocolError, ValidationError
from .metrics import tokenize

DEFAULT_EMBED_DIM = 1536
DEFAULT_EMBED_MODEL = "text-embedding-ada-002"


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    dim: int
    source: str  # "hashed" or "remote:<model-id>"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.shape[0] != self.dim:
            raise ValidationError(
                f"embedding has {values.shape} values, expected ({self.dim},)"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("embedding values must be finite")


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    kind: str = "hashed"  # "remote" or "hashed"
    dim: int = DEFAULT_EMBED_DIM
    model_id: str = DEFAULT_EMBED_MODEL
    base_url: str = ""
    max_in_flight: int = 4
    api_key: str | None = None

    def __post_init__(self):
        if self.kind not in ("remote", "hashed"):
            raise ConfigError(f"unknown embedding provider kind: {self.kind!r}")
        if self.dim < 2:
            raise ConfigError("embedding dim must be >= 2")
        if self.max_in_flight < 1:
            raise ConfigError("max_in_flight must be >= 1")
        if self.kind == "remote" and not self.base_url:
            raise ConfigError("remote embedding provider requires base_url")


def _signed_hash(gram: str, dim: int) -> tuple[int, float]:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    value = int.from_bytes(digest, "big")
    bucket = value % dim
    sign = 1.0 if (value >> 60) & 1 else -1.0
    return bucket, sign


def hash_embed(text: str, dim: int) -> EmbeddingVector:
    """Deterministic feature-hashing embedding over unigrams and bigrams."""
    if dim < 2:
        raise ValidationError("dim must be >= 2")
    tokens = tokenize(text)
    if not tokens:
        raise ValidationError("text has zero tokens; nothing to embed")
    grams = list(tokens)
    grams.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    values = np.zeros(dim, dtype=np.float64)
    for gram in grams:
        bucket, sign = _signed_hash(gram, dim)
        values[bucket] += sign
    norm = math.sqrt(float(np.dot(values, values)))
    if norm == 0.0:
        # Possible only if signed counts cancel exactly in every bucket.
        raise ValidationError("hashed embedding collapsed to the zero vector")
    return EmbeddingVector(values=values / norm, dim=dim, source="hashed")


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """dot(a, b) / (|a| |b|), clamped to [-1, 1] against rounding."""
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    na = float(np.linalg.norm(a.values))
    nb = float(np.linalg.norm(b.values))
    if na == 0.0 or nb == 0.0:
        raise ValidationError("cosine similarity undefined for the zero vector")
    sim = float(np.dot(a.values, b.values) / (na * nb))
    return max(-1.0, min(1.0, sim))


def as_matrix(vectors: list[EmbeddingVector]) -> np.ndarray:
    """Stack embedding vectors into an (n, dim) float64 matrix."""
    if not vectors:
        raise ValidationError("no vectors to stack")
    dim = vectors[0].dim
    for v in vectors:
        if v.dim != dim:
            raise ValidationError("vectors have mixed dimensions")
    return np.vstack([v.values for v in vectors])


def _fetch_remote_chunk(chunk: list[str], config: EmbeddingProviderConfig) -> list[EmbeddingVector]:
    payload = {"model": config.model_id, "input": chunk}
    headers = {}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    body = post_json_with_retry(
        config.base_url.rstrip("/") + "/v1/embeddings", payload, headers
    )
    data = body.get("data")
    if not isinstance(data, list) or len(data) != len(chunk):
        raise ProtocolError(
            f"embeddings response has {len(data) if isinstance(data, list) else 'no'} "
            f"items for {len(chunk)} inputs"
        )
    out = []
    for item in data:
        emb = item.get("embedding") if isinstance(item, dict) else None
        if not isinstance(emb, list):
            raise ProtocolError("embeddings response item missing 'embedding'")
        if len(emb) != config.dim:
            raise ProtocolError(
                f"embedding has dimension {len(emb)}, expected {config.dim}"
            )
        out.append(
            EmbeddingVector(
                values=np.asarray(emb, dtype=np.float64),
                dim=config.dim,
                source=f"remote:{config.model_id}",
            )
        )
    return out


_REMOTE_CHUNK_SIZE = 64


def embed_batch(texts: list[str], config: EmbeddingProviderConfig) -> list[EmbeddingVector]:
    """Embed texts in input order.

    Hashed provider: pure per-text hashing. Remote provider: chunks of up to
    64 texts per request, at most ``max_in_flight`` requests in flight,
    results reassembled in input order.
    """
    if not texts:
        raise ValidationError("texts must be non-empty")
    for i, text in enumerate(texts):
        if not text:
            raise ValidationError(f"text at index {i} is empty")
    if config.kind == "hashed":
        return [hash_embed(text, config.dim) for text in texts]
    chunks = [
        list(texts[i : i + _REMOTE_CHUNK_SIZE])
        for i in range(0, len(texts), _REMOTE_CHUNK_SIZE)
    ]
    if len(chunks) == 1:
        results = [_fetch_remote_chunk(chunks[0], config)]
    else:
        with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
            results = list(pool.map(lambda c: _fetch_remote_chunk(c, config), chunks))
    out: list[EmbeddingVector] = []
    for chunk_result in results:
        out.extend(chunk_result)
    return out
