import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from postsel import _backend, _kernels_py
from strategies import seeds

compiled = pytest.importorskip("postsel._kernels", reason="compiled extension not built")


def _hermitian(seed, n):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + g.conj().T) / 2


@given(seeds, st.integers(0, 2**64 - 1))
def test_mix64_identical(seed, index):
    assert compiled.mix64(seed, index) == _kernels_py.mix64(seed, index)


@given(seeds, st.floats(0.0, 1.0), st.integers(1, 5000))
def test_mc_counts_bit_identical(seed, p, n):
    pr, ps = (0.2, 0.3, 0.5), (0.6, 0.1, 0.3)
    a = compiled.mc_counts(seed, n, p, pr, ps)
    b = _kernels_py.mc_counts(seed, n, p, pr, ps)
    assert np.array_equal(np.asarray(a), np.asarray(b))


def test_mc_counts_chunking_irrelevant():
    pr, ps = (0.25, 0.25, 0.5), (0.1, 0.2, 0.7)
    whole = _kernels_py.mc_counts(5, 10000, 0.4, pr, ps)
    pieces = _kernels_py.mc_counts(5, 10000, 0.4, pr, ps, chunk=777)
    assert np.array_equal(whole, pieces)


@given(seeds, st.integers(1, 6))
def test_jacobi_agree(seed, n):
    a = _hermitian(seed, n)
    wa, va, sa = compiled.jacobi_eigh(a, 1e-14, 100)
    wb, vb, sb = _kernels_py.jacobi_eigh(a, 1e-14, 100)
    assert sa == sb >= 0
    np.testing.assert_allclose(np.asarray(wa), wb, atol=1e-12)
    np.testing.assert_allclose(np.sort(wb), np.linalg.eigvalsh(a), atol=1e-11)
    for w, v in ((np.asarray(wa), np.asarray(va)), (wb, vb)):
        np.testing.assert_allclose(a @ v, v * w, atol=1e-11)


def test_env_forces_fallback():
    code = "from postsel import _backend; print(_backend.BACKEND)"
    env = dict(os.environ, POSTSEL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_default_prefers_compiled():
    assert _backend.BACKEND == "compiled"
