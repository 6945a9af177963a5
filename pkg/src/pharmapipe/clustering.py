"""Agglomerative hierarchical clustering over embeddings, cluster purity
against category labels, and 2D projections (PCA / exact t-SNE) for plotting.

The merge loop is the standard greedy algorithm: start from singletons and
repeatedly join the closest pair under the linkage rule. Ties are broken
deterministically in favour of the pair whose (smaller node id, larger node
id) is lexicographically least; leaves are nodes 0..n-1 and merge t creates
node n+t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .embeddings import EmbeddingVector, as_matrix
from .errors import ConfigError, ValidationError

LINKAGES = ("single", "complete", "average", "ward")
METRICS = ("cosine_distance", "euclidean")

_MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class Dendrogram:
    merges: tuple[tuple[int, int, float, int], ...]  # (left, right, distance, new_id)
    n_leaves: int
    linkage: str
    metric: str

    def __post_init__(self):
        if len(self.merges) != self.n_leaves - 1:
            raise ValidationError(
                f"dendrogram needs {self.n_leaves - 1} merges, has {len(self.merges)}"
            )
        prev = -math.inf
        for _, _, dist, _ in self.merges:
            if dist < prev - _MONOTONE_SLACK:
                raise ValidationError("merge distances must be non-decreasing")
            prev = max(prev, dist)


@dataclass(frozen=True)
class ClusterAssignment:
    labels: tuple[int, ...]
    k: int

    def __post_init__(self):
        used = set(self.labels)
        if used != set(range(self.k)):
            raise ValidationError(f"expected dense cluster ids 0..{self.k - 1}, got {sorted(used)}")


@dataclass(frozen=True)
class Projection2D:
    points: tuple[tuple[float, float], ...]
    method: str
    seed: int

    def __post_init__(self):
        for x, y in self.points:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValidationError("projection coordinates must be finite")


def _to_matrix(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        X = np.asarray(vectors, dtype=np.float64)
        if X.ndim != 2:
            raise ValidationError("expected a 2D array of vectors")
        return X
    if vectors and isinstance(vectors[0], EmbeddingVector):
        return as_matrix(list(vectors))
    return np.asarray(vectors, dtype=np.float64).reshape(len(vectors), -1)


def pairwise_distance_matrix(X: np.ndarray, metric: str) -> np.ndarray:
    """Full symmetric leaf distance matrix with a zero diagonal."""
    if metric == "cosine_distance":
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms == 0.0):
            raise ValidationError("cosine distance undefined for zero vectors")
        N = X / norms[:, None]
        D = 1.0 - N @ N.T
        np.clip(D, 0.0, 2.0, out=D)
    elif metric == "euclidean":
        sq = np.sum(X * X, axis=1)
        D = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
        np.clip(D, 0.0, None, out=D)
        np.sqrt(D, out=D)
    else:
        raise ConfigError(f"unknown metric: {metric!r}")
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def agglomerate(vectors, linkage: str = "average", metric: str = "cosine_distance") -> Dendrogram:
    """Cluster vectors bottom-up under the given linkage and metric."""
    if linkage not in LINKAGES:
        raise ConfigError(f"unknown linkage: {linkage!r}")
    if metric not in METRICS:
        raise ConfigError(f"unknown metric: {metric!r}")
    if linkage == "ward" and metric != "euclidean":
        raise ConfigError("ward linkage requires the euclidean metric")
    X = _to_matrix(vectors)
    n = X.shape[0]
    if n < 2:
        raise ValidationError("agglomerate needs at least 2 vectors")
    D = pairwise_distance_matrix(X, metric)
    left, right, height = kernels.linkage_merge(D, kernels.LINKAGE_CODES[linkage])
    merges = tuple(
        (int(left[t]), int(right[t]), float(height[t]), n + t) for t in range(n - 1)
    )
    return Dendrogram(merges=merges, n_leaves=n, linkage=linkage, metric=metric)


def cut(dendrogram: Dendrogram, k: int) -> ClusterAssignment:
    """Flatten the dendrogram to k clusters by undoing the last k-1 merges.

    Components are labeled 0..k-1 in order of their smallest member index.
    """
    n = dendrogram.n_leaves
    if not (1 <= k <= n):
        raise ValidationError(f"k must be in [1, {n}], got {k}")
    parent: dict[int, int] = {}
    for left, right, _, new_id in dendrogram.merges[: n - k]:
        parent[left] = new_id
        parent[right] = new_id

    def root(node: int) -> int:
        while node in parent:
            node = parent[node]
        return node

    label_of_root: dict[int, int] = {}
    labels = []
    for leaf in range(n):
        r = root(leaf)
        if r not in label_of_root:
            label_of_root[r] = len(label_of_root)
        labels.append(label_of_root[r])
    return ClusterAssignment(labels=tuple(labels), k=k)


def purity(assignment: ClusterAssignment, labels: list) -> float:
    """(1/N) * sum over clusters of the majority-label count."""
    if len(assignment.labels) != len(labels):
        raise ValidationError(
            f"length mismatch: {len(assignment.labels)} assignments vs {len(labels)} labels"
        )
    counts: dict[int, dict] = {}
    for cluster, label in zip(assignment.labels, labels):
        counts.setdefault(cluster, {})
        counts[cluster][label] = counts[cluster].get(label, 0) + 1
    majority_total = sum(max(by_label.values()) for by_label in counts.values())
    return majority_total / len(labels)


# ---------------------------------------------------------------------------
# 2D projection
# ---------------------------------------------------------------------------

TSNE_ITERATIONS = 1000
TSNE_LEARNING_RATE = 200.0
TSNE_EXAGGERATION = 12.0
TSNE_EXAGGERATION_STOP = 250
TSNE_MOMENTUM_SWITCH = 250


def _pca_2d(X: np.ndarray) -> np.ndarray:
    Xc = X - X.mean(axis=0)
    _, _, Vt = np.linalg.svd(Xc, full_matrices=False)
    comps = Vt[: min(2, Vt.shape[0])]
    fixed = []
    for comp in comps:
        pivot = int(np.argmax(np.abs(comp)))
        fixed.append(-comp if comp[pivot] < 0 else comp)
    points = Xc @ np.vstack(fixed).T
    if points.shape[1] < 2:
        points = np.hstack([points, np.zeros((points.shape[0], 2 - points.shape[1]))])
    return points


def _tsne_affinities(D2: np.ndarray, perplexity: float) -> np.ndarray:
    """Per-point precision chosen by bisection to match the target perplexity;
    conditional affinities symmetrized and floored.
    """
    n = D2.shape[0]
    target_entropy = math.log(perplexity)
    beta = np.ones(n)
    beta_min = np.zeros(n)
    beta_max = np.full(n, np.inf)
    eye = np.eye(n, dtype=bool)
    for _ in range(64):
        W = np.exp(-beta[:, None] * D2)
        W[eye] = 0.0
        sum_w = np.maximum(W.sum(axis=1), 1e-300)
        entropy = np.log(sum_w) + beta * (D2 * W).sum(axis=1) / sum_w
        too_diffuse = entropy > target_entropy
        beta_min = np.where(too_diffuse, beta, beta_min)
        beta_max = np.where(too_diffuse, beta_max, beta)
        beta = np.where(
            too_diffuse,
            np.where(np.isinf(beta_max), beta * 2.0, 0.5 * (beta + beta_max)),
            0.5 * (beta + beta_min),
        )
    W = np.exp(-beta[:, None] * D2)
    W[eye] = 0.0
    P_cond = W / np.maximum(W.sum(axis=1, keepdims=True), 1e-300)
    P = (P_cond + P_cond.T) / (2.0 * n)
    return np.maximum(P, 1e-12)


def project_2d(vectors, method: str = "pca", seed: int = 0) -> Projection2D:
    """Project vectors to 2D via deterministic PCA or seeded exact t-SNE.

    t-SNE uses perplexity max(1, min(30, (n-1)/3)), 1000 iterations, and a
    seeded gaussian initialization.
    """
    X = _to_matrix(vectors)
    n = X.shape[0]
    if n < 3:
        raise ValidationError("project_2d needs at least 3 vectors")
    if method == "pca":
        points = _pca_2d(X)
    elif method == "tsne":
        sq = np.sum(X * X, axis=1)
        D2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
        np.clip(D2, 0.0, None, out=D2)
        D2 = 0.5 * (D2 + D2.T)
        np.fill_diagonal(D2, 0.0)
        perplexity = max(1.0, min(30.0, (n - 1) / 3.0))
        P = _tsne_affinities(D2, perplexity)
        rng = np.random.default_rng(seed)
        Y0 = rng.normal(0.0, 1e-4, size=(n, 2))
        points = kernels.tsne_gradient(
            P,
            Y0,
            TSNE_ITERATIONS,
            TSNE_LEARNING_RATE,
            TSNE_EXAGGERATION,
            TSNE_EXAGGERATION_STOP,
            TSNE_MOMENTUM_SWITCH,
        )
    else:
        raise ConfigError(f"unknown projection method: {method!r}")
    return Projection2D(
        points=tuple((float(x), float(y)) for x, y in points),
        method=method,
        seed=seed,
    )
