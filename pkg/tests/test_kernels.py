import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eckhaus import kernels
from eckhaus.kernels import _fallback

compiled = pytest.importorskip("eckhaus.kernels._kernels")


def _random(rng, *shape):
    return np.ascontiguousarray(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), M=st.integers(1, 6), n=st.integers(1, 3))
def test_compiled_matches_fallback(seed, M, n):
    rng = np.random.default_rng(seed)
    P = 2 * M + 1
    U = _random(rng, P, n)
    tab, T = _random(rng, P, P), _random(rng, n, n, n)
    tab3, T4 = _random(rng, P, P, P), _random(rng, n, n, n, n)
    assert np.allclose(compiled.quad_conv(U, tab, T), _fallback.quad_conv(U, tab, T), atol=1e-12)
    assert np.allclose(compiled.cubic_conv(U, tab3, T4), _fallback.cubic_conv(U, tab3, T4), atol=1e-11)
    for slot in (0, 1):
        assert np.allclose(compiled.quad_bloch(U, tab, T, slot), _fallback.quad_bloch(U, tab, T, slot), atol=1e-12)
    for slot in (0, 1, 2):
        assert np.allclose(compiled.cubic_bloch(U, tab3, T4, slot), _fallback.cubic_bloch(U, tab3, T4, slot),
                           atol=1e-11)


def test_quad_conv_is_a_convolution():
    # scalar, unit tensor and weights: plain discrete convolution restricted to |eta| <= M
    M = 4
    rng = np.random.default_rng(1)
    U = _random(rng, 2 * M + 1, 1)
    out = _fallback.quad_conv(U, np.ones((2 * M + 1,) * 2, complex), np.ones((1, 1, 1), complex))
    full = np.convolve(U[:, 0], U[:, 0])
    assert np.allclose(out[:, 0], full[M:3 * M + 1])


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "cython")])
def test_backend_selection(flag, expected):
    env = dict(os.environ, ECKHAUS_PURE_PYTHON=flag)
    out = subprocess.run([sys.executable, "-c", "import eckhaus.kernels as k; print(k.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == expected


def test_default_backend_is_compiled():
    if os.environ.get("ECKHAUS_PURE_PYTHON"):
        pytest.skip("numpy backend forced")
    assert kernels.BACKEND == "cython"
