"""Independent reference implementations used only by the test suite.

These deliberately take different routes from the package code: ROUGE by
multiset removal, LCS by enumerating subsequences, linkage by recomputing
every cluster-pair distance from the original leaf matrix at every step
(never the Lance-Williams recurrence), and k-NN by repeated max scans.
"""

from __future__ import annotations

import math

import numpy as np


# ---------------------------------------------------------------------------
# ROUGE oracles
# ---------------------------------------------------------------------------


def rouge_n_oracle(cand_tokens: list[str], ref_tokens: list[str], n: int):
    cand_grams = [tuple(cand_tokens[i : i + n]) for i in range(len(cand_tokens) - n + 1)]
    ref_grams = [tuple(ref_tokens[i : i + n]) for i in range(len(ref_tokens) - n + 1)]
    remaining = list(ref_grams)
    overlap = 0
    for gram in cand_grams:
        if gram in remaining:
            remaining.remove(gram)
            overlap += 1
    precision = overlap / len(cand_grams) if cand_grams else 0.0
    recall = overlap / len(ref_grams) if ref_grams else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _is_subsequence(sub: list, seq: list) -> bool:
    it = iter(seq)
    return all(any(x == y for y in it) for x in sub)


def lcs_oracle(a: list, b: list) -> int:
    """Max length over all subsequences of the shorter side that are also a
    subsequence of the longer side. Exponential; inputs must stay tiny.
    """
    if len(a) > len(b):
        a, b = b, a
    best = 0
    for mask in range(1 << len(a)):
        count = mask.bit_count()
        if count <= best:
            continue
        sub = [a[i] for i in range(len(a)) if mask >> i & 1]
        if _is_subsequence(sub, b):
            best = count
            if best == len(a):
                break
    return best


def rouge_l_oracle(cand_tokens: list[str], ref_tokens: list[str]):
    if not cand_tokens or not ref_tokens:
        return 0.0, 0.0, 0.0
    lcs = lcs_oracle(cand_tokens, ref_tokens)
    precision = lcs / len(cand_tokens)
    recall = lcs / len(ref_tokens)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


# ---------------------------------------------------------------------------
# Agglomerative linkage oracle
# ---------------------------------------------------------------------------


def leaf_distances(X: np.ndarray, metric: str) -> np.ndarray:
    n = len(X)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if metric == "euclidean":
                d = math.sqrt(float(np.sum((X[i] - X[j]) ** 2)))
            else:
                na = math.sqrt(float(np.dot(X[i], X[i])))
                nb = math.sqrt(float(np.dot(X[j], X[j])))
                d = 1.0 - float(np.dot(X[i], X[j])) / (na * nb)
                d = min(max(d, 0.0), 2.0)
            D[i, j] = D[j, i] = d
    return D


def linkage_oracle(X: np.ndarray, linkage: str, metric: str):
    """Greedy agglomeration recomputing all cluster-pair distances from the
    leaf matrix (or centroids, for ward) at every step.
    """
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    D = leaf_distances(X, metric)
    clusters: list[tuple[int, np.ndarray]] = [(i, np.array([i])) for i in range(n)]
    merges = []
    next_id = n
    for _ in range(n - 1):
        k = len(clusters)
        sizes = np.array([len(m) for _, m in clusters], dtype=np.float64)
        if linkage == "ward":
            centroids = np.array([X[m].mean(axis=0) for _, m in clusters])
            diff = centroids[:, None, :] - centroids[None, :, :]
            cd = np.sqrt(np.sum(diff * diff, axis=2))
            coef = np.sqrt(2.0 * np.outer(sizes, sizes) / (sizes[:, None] + sizes[None, :]))
            block = coef * cd
        else:
            order = np.concatenate([m for _, m in clusters])
            offsets = np.zeros(k, dtype=np.intp)
            np.cumsum(sizes[:-1].astype(np.intp), out=offsets[1:])
            Dp = D[np.ix_(order, order)]
            if linkage == "single":
                block = np.minimum.reduceat(
                    np.minimum.reduceat(Dp, offsets, axis=1), offsets, axis=0
                )
            elif linkage == "complete":
                block = np.maximum.reduceat(
                    np.maximum.reduceat(Dp, offsets, axis=1), offsets, axis=0
                )
            else:  # average
                sums = np.add.reduceat(np.add.reduceat(Dp, offsets, axis=1), offsets, axis=0)
                block = sums / np.outer(sizes, sizes)
        np.fill_diagonal(block, np.inf)
        best = block.min()
        ties = np.argwhere(block == best)
        candidates = set()
        for pi, pj in ties:
            if pi == pj:
                continue
            # Sum-based blocks are only symmetric up to rounding; normalize.
            pi, pj = (int(pi), int(pj)) if pi < pj else (int(pj), int(pi))
            id_i, id_j = clusters[pi][0], clusters[pj][0]
            lo, hi = min(id_i, id_j), max(id_i, id_j)
            candidates.add((lo, hi, pi, pj))
        lo, hi, pi, pj = min(candidates)
        merged = np.concatenate([clusters[pi][1], clusters[pj][1]])
        merges.append((lo, hi, float(best), next_id))
        new_clusters = [c for idx, c in enumerate(clusters) if idx not in (pi, pj)]
        new_clusters.append((next_id, merged))
        clusters = new_clusters
        next_id += 1
    return merges


# ---------------------------------------------------------------------------
# k-NN oracle
# ---------------------------------------------------------------------------


def knn_oracle(pool: list[tuple[str, np.ndarray]], query: np.ndarray, k: int):
    """Top-k (id, similarity) by repeated max scan; ties favour smaller id.
    Returns pairs in descending similarity order.
    """

    def cosine(u, v):
        dot = sum(float(a) * float(b) for a, b in zip(u, v))
        nu = math.sqrt(sum(float(a) * float(a) for a in u))
        nv = math.sqrt(sum(float(b) * float(b) for b in v))
        return dot / (nu * nv)

    scored = [(pid, cosine(vec, query)) for pid, vec in pool]
    picked = []
    remaining = list(scored)
    while remaining and len(picked) < k:
        best = remaining[0]
        for item in remaining[1:]:
            if item[1] > best[1] or (item[1] == best[1] and item[0] < best[0]):
                best = item
        picked.append(best)
        remaining.remove(best)
    return picked
