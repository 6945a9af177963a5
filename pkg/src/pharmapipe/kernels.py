"""Hot numeric kernels with numba-accelerated and pure-numpy implementations.

Three inner loops dominate runtime at scale: the LCS dynamic program behind
ROUGE-L, the agglomerative linkage merge loop, and the exact t-SNE gradient
descent. Each exists in two variants:

* ``*_numba`` — explicit-loop versions compiled with ``@njit`` (used when
  numba imports and is not disabled),
* ``*_numpy`` — vectorized pure-numpy fallbacks.

Set ``PHARMAPIPE_NO_NUMBA=1`` to force the numpy path. The public names
(``lcs_length``, ``linkage_merge``, ``tsne_gradient``) dispatch to the active
path; ``benchmarks/bench_kernels.py`` times both against each other.

LCS and linkage results are integer/IEEE-deterministic and identical across
paths; the t-SNE gradient loop accumulates sums in different orders, so final
coordinates agree only approximately between paths (each path is individually
deterministic for a fixed seed).
"""

from __future__ import annotations

import os

import numpy as np

LINKAGE_SINGLE = 0
LINKAGE_COMPLETE = 1
LINKAGE_AVERAGE = 2
LINKAGE_WARD = 3

LINKAGE_CODES = {
    "single": LINKAGE_SINGLE,
    "complete": LINKAGE_COMPLETE,
    "average": LINKAGE_AVERAGE,
    "ward": LINKAGE_WARD,
}

_DISABLED = os.environ.get("PHARMAPIPE_NO_NUMBA", "").strip().lower() in (
    "1",
    "true",
    "yes",
)

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised via env flag instead
    NUMBA_AVAILABLE = False

USING_NUMBA = NUMBA_AVAILABLE and not _DISABLED


# ---------------------------------------------------------------------------
# LCS length (ROUGE-L core)
# ---------------------------------------------------------------------------


def _lcs_loop(a, b):
    m = a.shape[0]
    n = b.shape[0]
    if m == 0 or n == 0:
        return 0
    prev = np.zeros(n + 1, np.int64)
    cur = np.zeros(n + 1, np.int64)
    for i in range(1, m + 1):
        ai = a[i - 1]
        for j in range(1, n + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                up = prev[j]
                left = cur[j - 1]
                cur[j] = up if up >= left else left
        prev, cur = cur, prev
    return int(prev[n])


def lcs_length_numpy(a: np.ndarray, b: np.ndarray) -> int:
    """Row-vectorized LCS: valid because every DP row is non-decreasing."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    m, n = a.shape[0], b.shape[0]
    if m == 0 or n == 0:
        return 0
    prev = np.zeros(n + 1, np.int64)
    for i in range(m):
        cand = np.where(b == a[i], prev[:-1] + 1, 0)
        cur = np.maximum(prev[1:], cand)
        np.maximum.accumulate(cur, out=cur)
        prev = np.concatenate((prev[:1] * 0, cur))
    return int(prev[n])


# ---------------------------------------------------------------------------
# Agglomerative linkage merge loop
# ---------------------------------------------------------------------------


def _linkage_loop(D, method):
    n = D.shape[0]
    W = D.copy()
    active = np.ones(n, np.bool_)
    node_id = np.arange(n)
    size = np.ones(n, np.float64)
    left = np.empty(n - 1, np.int64)
    right = np.empty(n - 1, np.int64)
    height = np.empty(n - 1, np.float64)
    for step in range(n - 1):
        best = np.inf
        bi = -1
        bj = -1
        blo = -1
        bhi = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if not active[j]:
                    continue
                d = W[i, j]
                lo = node_id[i]
                hi = node_id[j]
                if lo > hi:
                    lo, hi = hi, lo
                if d < best or (
                    d == best and (lo < blo or (lo == blo and hi < bhi))
                ):
                    best = d
                    bi = i
                    bj = j
                    blo = lo
                    bhi = hi
        left[step] = blo
        right[step] = bhi
        height[step] = best
        ni = size[bi]
        nj = size[bj]
        for k in range(n):
            if not active[k] or k == bi or k == bj:
                continue
            dik = W[bi, k]
            djk = W[bj, k]
            if method == 0:
                nd = dik if dik < djk else djk
            elif method == 1:
                nd = dik if dik > djk else djk
            elif method == 2:
                nd = (ni * dik + nj * djk) / (ni + nj)
            else:
                nk = size[k]
                t = 1.0 / (ni + nj + nk)
                nd = np.sqrt(
                    (ni + nk) * t * dik * dik
                    + (nj + nk) * t * djk * djk
                    - nk * t * best * best
                )
            W[bi, k] = nd
            W[k, bi] = nd
        size[bi] = ni + nj
        node_id[bi] = n + step
        active[bj] = False
    return left, right, height


def linkage_merge_numpy(D: np.ndarray, method: int):
    """Greedy agglomerative merging, vectorized one step at a time.

    Same tie-break as the loop kernel: among equal-distance pairs, the pair
    with the lexicographically smallest (lower node id, higher node id) wins.
    """
    n = D.shape[0]
    W = D.astype(np.float64, copy=True)
    active = np.ones(n, bool)
    node_id = np.arange(n, dtype=np.int64)
    size = np.ones(n, np.float64)
    left = np.empty(n - 1, np.int64)
    right = np.empty(n - 1, np.int64)
    height = np.empty(n - 1, np.float64)
    for step in range(n - 1):
        pair_ok = active[:, None] & active[None, :]
        M = np.where(pair_ok, W, np.inf)
        np.fill_diagonal(M, np.inf)
        best = M.min()
        ii, jj = np.nonzero(M == best)
        lo = np.minimum(node_id[ii], node_id[jj])
        hi = np.maximum(node_id[ii], node_id[jj])
        pick = np.lexsort((hi, lo))[0]
        bi, bj = int(ii[pick]), int(jj[pick])
        if bi > bj:
            bi, bj = bj, bi
        left[step] = lo[pick]
        right[step] = hi[pick]
        height[step] = best
        ni = size[bi]
        nj = size[bj]
        others = active.copy()
        others[bi] = False
        others[bj] = False
        dik = W[bi, others]
        djk = W[bj, others]
        if method == LINKAGE_SINGLE:
            nd = np.minimum(dik, djk)
        elif method == LINKAGE_COMPLETE:
            nd = np.maximum(dik, djk)
        elif method == LINKAGE_AVERAGE:
            nd = (ni * dik + nj * djk) / (ni + nj)
        else:
            nk = size[others]
            t = 1.0 / (ni + nj + nk)
            nd = np.sqrt(
                (ni + nk) * t * dik * dik
                + (nj + nk) * t * djk * djk
                - nk * t * best * best
            )
        W[bi, others] = nd
        W[others, bi] = nd
        size[bi] = ni + nj
        node_id[bi] = n + step
        active[bj] = False
    return left, right, height


# ---------------------------------------------------------------------------
# Exact t-SNE gradient descent
# ---------------------------------------------------------------------------


def _tsne_loop(P, Y0, n_iter, learning_rate, exaggeration, exaggeration_stop, momentum_switch):
    n = Y0.shape[0]
    Y = Y0.copy()
    update = np.zeros((n, 2))
    gains = np.ones((n, 2))
    grad = np.zeros((n, 2))
    qnum = np.zeros((n, n))
    Pe = P * exaggeration
    for it in range(n_iter):
        if it == exaggeration_stop:
            Pe = Pe / exaggeration
        sum_q = 0.0
        for i in range(n):
            for j in range(n):
                if i == j:
                    qnum[i, j] = 0.0
                else:
                    dx = Y[i, 0] - Y[j, 0]
                    dy = Y[i, 1] - Y[j, 1]
                    q = 1.0 / (1.0 + dx * dx + dy * dy)
                    qnum[i, j] = q
                    sum_q += q
        for i in range(n):
            gx = 0.0
            gy = 0.0
            for j in range(n):
                if i == j:
                    continue
                q = qnum[i, j]
                mult = (Pe[i, j] - q / sum_q) * q
                gx += mult * (Y[i, 0] - Y[j, 0])
                gy += mult * (Y[i, 1] - Y[j, 1])
            grad[i, 0] = 4.0 * gx
            grad[i, 1] = 4.0 * gy
        momentum = 0.5 if it < momentum_switch else 0.8
        for i in range(n):
            for c in range(2):
                if (grad[i, c] > 0.0) != (update[i, c] > 0.0):
                    gains[i, c] += 0.2
                else:
                    gains[i, c] *= 0.8
                if gains[i, c] < 0.01:
                    gains[i, c] = 0.01
                update[i, c] = momentum * update[i, c] - learning_rate * gains[i, c] * grad[i, c]
                Y[i, c] += update[i, c]
        mx = 0.0
        my = 0.0
        for i in range(n):
            mx += Y[i, 0]
            my += Y[i, 1]
        mx /= n
        my /= n
        for i in range(n):
            Y[i, 0] -= mx
            Y[i, 1] -= my
    return Y


def tsne_gradient_numpy(
    P: np.ndarray,
    Y0: np.ndarray,
    n_iter: int,
    learning_rate: float,
    exaggeration: float,
    exaggeration_stop: int,
    momentum_switch: int,
) -> np.ndarray:
    n = Y0.shape[0]
    Y = Y0.astype(np.float64, copy=True)
    update = np.zeros((n, 2))
    gains = np.ones((n, 2))
    Pe = P * exaggeration
    for it in range(n_iter):
        if it == exaggeration_stop:
            Pe = Pe / exaggeration
        sq = np.sum(Y * Y, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (Y @ Y.T)
        qnum = 1.0 / (1.0 + np.maximum(d2, 0.0))
        np.fill_diagonal(qnum, 0.0)
        sum_q = qnum.sum()
        PQ = (Pe - qnum / sum_q) * qnum
        grad = 4.0 * (np.diag(PQ.sum(axis=1)) @ Y - PQ @ Y)
        momentum = 0.5 if it < momentum_switch else 0.8
        sign_mismatch = (grad > 0.0) != (update > 0.0)
        gains = np.where(sign_mismatch, gains + 0.2, gains * 0.8)
        np.clip(gains, 0.01, None, out=gains)
        update = momentum * update - learning_rate * gains * grad
        Y = Y + update
        Y = Y - Y.mean(axis=0)
    return Y


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:
    lcs_length_numba = njit(cache=True)(_lcs_loop)
    linkage_merge_numba = njit(cache=True)(_linkage_loop)
    tsne_gradient_numba = njit(cache=True)(_tsne_loop)

if USING_NUMBA:
    _lcs_impl = lcs_length_numba
    _linkage_impl = linkage_merge_numba
    _tsne_impl = tsne_gradient_numba
else:
    _lcs_impl = lcs_length_numpy
    _linkage_impl = linkage_merge_numpy
    _tsne_impl = tsne_gradient_numpy


def lcs_length(a: np.ndarray, b: np.ndarray) -> int:
    """Length of the longest common subsequence of two integer id arrays."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    return int(_lcs_impl(a, b))


def linkage_merge(D: np.ndarray, method: int):
    """Run the full merge loop over a leaf distance matrix.

    Returns (left, right, height) arrays of length n-1; node ids follow the
    convention leaves 0..n-1, merge t creates node n+t.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    return _linkage_impl(D, method)


def tsne_gradient(
    P: np.ndarray,
    Y0: np.ndarray,
    n_iter: int,
    learning_rate: float,
    exaggeration: float,
    exaggeration_stop: int,
    momentum_switch: int,
) -> np.ndarray:
    P = np.ascontiguousarray(P, dtype=np.float64)
    Y0 = np.ascontiguousarray(Y0, dtype=np.float64)
    return _tsne_impl(
        P, Y0, n_iter, learning_rate, exaggeration, exaggeration_stop, momentum_switch
    )
