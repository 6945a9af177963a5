"""Shared HTTP POST helper with the package-wide retry policy.

Request bodies are serialized with compact separators and UTF-8 so the wire
bytes are reproducible; tests snapshot them against a stub server. Retries:
up to 3 attempts with exponential backoff starting at 500 ms, only for
transport errors and HTTP 429/5xx.
"""

from __future__ import annotations

import json
import time

import requests

from .errors import AuthError, ProtocolError, TransportError

MAX_ATTEMPTS = 3
BACKOFF_START_S = 0.5

_sleep = time.sleep  # patched in tests


def encode_body(payload: dict) -> bytes:
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def post_json_with_retry(
    url: str,
    payload: dict,
    headers: dict | None = None,
    timeout_s: float = 60.0,
) -> dict:
    body = encode_body(payload)
    all_headers = {"Content-Type": "application/json"}
    if headers:
        all_headers.update(headers)
    last_error: Exception | None = None
    for attempt in range(1, MAX_ATTEMPTS + 1):
        try:
            resp = requests.post(url, data=body, headers=all_headers, timeout=timeout_s)
        except requests.RequestException as exc:
            last_error = exc
            if attempt < MAX_ATTEMPTS:
                _sleep(BACKOFF_START_S * 2 ** (attempt - 1))
            continue
        if resp.status_code == 401:
            raise AuthError(
                "endpoint returned 401; check the PHARMAPIPE_API_KEY environment variable"
            )
        if resp.status_code == 429 or resp.status_code >= 500:
            last_error = ProtocolError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            if attempt < MAX_ATTEMPTS:
                _sleep(BACKOFF_START_S * 2 ** (attempt - 1))
            continue
        if resp.status_code >= 400:
            raise ProtocolError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            parsed = resp.json()
        except ValueError:
            raise ProtocolError(f"non-JSON response from {url}") from None
        if not isinstance(parsed, dict):
            raise ProtocolError(f"expected a JSON object from {url}")
        return parsed
    raise TransportError(f"POST {url} failed: {last_error}", attempts=MAX_ATTEMPTS)
