#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py
The numpy path can also be forced package-wide with PHARMAPIPE_NO_NUMBA=1;
this script imports both variants directly so it always compares the two.
"""

from __future__ import annotations

import time

import numpy as np

from pharmapipe import kernels
from pharmapipe.clustering import pairwise_distance_matrix


def timeit(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_lcs():
    rng = np.random.default_rng(0)
    pairs = [
        (
            rng.integers(0, 50, size=300).astype(np.int64),
            rng.integers(0, 50, size=300).astype(np.int64),
        )
        for _ in range(200)
    ]
    kernels.lcs_length_numba(*pairs[0])  # warm-up compile

    def run(fn):
        return [fn(a, b) for a, b in pairs]

    t_nb, out_nb = timeit(run, kernels.lcs_length_numba)
    t_np, out_np = timeit(run, kernels.lcs_length_numpy)
    assert [int(x) for x in out_nb] == out_np, "LCS paths disagree"
    report("LCS (200 pairs of 300 tokens)", t_nb, t_np)


def bench_linkage():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(400, 16))
    for name, code in kernels.LINKAGE_CODES.items():
        metric = "euclidean" if name == "ward" else "cosine_distance"
        D = pairwise_distance_matrix(X, metric)
        kernels.linkage_merge_numba(D.copy(), code)  # warm-up compile
        t_nb, out_nb = timeit(kernels.linkage_merge_numba, D.copy(), code)
        t_np, out_np = timeit(kernels.linkage_merge_numpy, D.copy(), code)
        assert np.array_equal(out_nb[0], out_np[0]) and np.array_equal(out_nb[2], out_np[2]), (
            f"linkage paths disagree for {name}"
        )
        report(f"linkage/{name} (n=400)", t_nb, t_np)


def bench_tsne():
    from pharmapipe.clustering import _tsne_affinities

    rng = np.random.default_rng(2)
    n = 300
    X = np.vstack([rng.normal(c, 0.4, size=(n // 3, 8)) for c in (0.0, 3.0, 6.0)])
    sq = np.sum(X * X, axis=1)
    D2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0)
    P = _tsne_affinities(D2, 30.0)
    Y0 = rng.normal(0, 1e-4, size=(n, 2))
    kernels.tsne_gradient_numba(P, Y0.copy(), 2, 200.0, 12.0, 1, 1)  # warm-up compile
    # Per-step math is identical across paths; accumulation order makes long
    # trajectories drift, so correctness is pinned at one step.
    one_nb = kernels.tsne_gradient_numba(P, Y0.copy(), 1, 200.0, 12.0, 100, 100)
    one_np = kernels.tsne_gradient_numpy(P, Y0.copy(), 1, 200.0, 12.0, 100, 100)
    assert np.allclose(one_nb, one_np, atol=1e-9), "t-SNE paths disagree after one step"
    args = (P, Y0, 250, 200.0, 12.0, 100, 100)
    t_nb, out_nb = timeit(kernels.tsne_gradient_numba, *args, repeat=1)
    t_np, out_np = timeit(kernels.tsne_gradient_numpy, *args, repeat=1)
    assert np.all(np.isfinite(out_nb)) and np.all(np.isfinite(out_np))
    report("t-SNE (n=300, 250 iters)", t_nb, t_np)


def report(label: str, t_numba: float, t_numpy: float):
    speedup = t_numpy / t_numba if t_numba > 0 else float("inf")
    print(f"{label:38s} numba {t_numba * 1000:9.2f} ms   numpy {t_numpy * 1000:9.2f} ms   speedup {speedup:5.2f}x")


def main():
    if not kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"numba active in package dispatch: {kernels.USING_NUMBA}")
    bench_lcs()
    bench_linkage()
    bench_tsne()


if __name__ == "__main__":
    main()
