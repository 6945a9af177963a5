"""Parity between the numba and numpy kernel paths, plus the env-flag switch."""

from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from pharmapipe import kernels
from pharmapipe.clustering import pairwise_distance_matrix

from oracles import lcs_oracle

needs_numba = pytest.mark.skipif(
    not kernels.NUMBA_AVAILABLE, reason="numba not importable"
)


def test_lcs_paths_agree_and_match_oracle():
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = rng.integers(0, 5, size=rng.integers(0, 12)).astype(np.int64)
        b = rng.integers(0, 5, size=rng.integers(0, 12)).astype(np.int64)
        expected = lcs_oracle(list(a), list(b))
        assert kernels.lcs_length_numpy(a, b) == expected
        if kernels.NUMBA_AVAILABLE:
            assert int(kernels.lcs_length_numba(a, b)) == expected


@needs_numba
@pytest.mark.parametrize("method_name", ["single", "complete", "average", "ward"])
def test_linkage_paths_identical(method_name):
    rng = np.random.default_rng(3)
    code = kernels.LINKAGE_CODES[method_name]
    metric = "euclidean" if method_name == "ward" else "cosine_distance"
    for n in (2, 5, 23, 60):
        X = rng.normal(size=(n, 6))
        D = pairwise_distance_matrix(X, metric)
        l1, r1, h1 = kernels.linkage_merge_numba(D.copy(), code)
        l2, r2, h2 = kernels.linkage_merge_numpy(D.copy(), code)
        assert np.array_equal(l1, l2)
        assert np.array_equal(r1, r2)
        assert np.array_equal(h1, h2)


@needs_numba
def test_tsne_paths_close_after_one_step():
    rng = np.random.default_rng(5)
    n = 30
    P = np.abs(rng.normal(size=(n, n)))
    P = (P + P.T) / P.sum()
    np.fill_diagonal(P, 0.0)
    Y0 = rng.normal(0, 1e-4, size=(n, 2))
    y_nb = kernels.tsne_gradient_numba(P, Y0.copy(), 1, 200.0, 12.0, 250, 250)
    y_np = kernels.tsne_gradient_numpy(P, Y0.copy(), 1, 200.0, 12.0, 250, 250)
    assert np.allclose(y_nb, y_np, atol=1e-9)


def test_tsne_numpy_deterministic():
    rng = np.random.default_rng(6)
    P = np.abs(rng.normal(size=(12, 12)))
    P = (P + P.T) / P.sum()
    np.fill_diagonal(P, 0.0)
    Y0 = rng.normal(0, 1e-4, size=(12, 2))
    a = kernels.tsne_gradient_numpy(P, Y0.copy(), 50, 200.0, 12.0, 25, 25)
    b = kernels.tsne_gradient_numpy(P, Y0.copy(), 50, 200.0, 12.0, 25, 25)
    assert np.array_equal(a, b)
    assert np.all(np.isfinite(a))


def test_env_flag_forces_numpy_path():
    env = dict(os.environ, PHARMAPIPE_NO_NUMBA="1")
    code = (
        "import numpy as np\n"
        "from pharmapipe import kernels\n"
        "assert not kernels.USING_NUMBA\n"
        "a = np.array([1, 2, 3], dtype=np.int64)\n"
        "b = np.array([3, 1, 2, 3], dtype=np.int64)\n"
        "assert kernels.lcs_length(a, b) == 3\n"
        "print('ok')\n"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert "ok" in out.stdout
