import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mopadgan import kernels
from mopadgan.kernels import python_backend as py

needs_ext = pytest.mark.skipif(kernels.compiled_backend is None, reason="extension not built")
cy = kernels.compiled_backend


def front(seed, n):
    r = np.random.default_rng(seed)
    t = np.sort(r.random(n))[::-1].copy()
    return np.ascontiguousarray(np.column_stack([t, 1 - t ** 2 + 0.01]))


def test_python_hv_by_hand():
    pts = np.array([[3.0, 1.0], [2.0, 2.0], [1.0, 3.0]])
    assert py.hv2d_sorted(pts, 0.0, 0.0) == 6.0
    assert py.hvi2d(pts, np.array([[2.5, 2.5], [0.5, 0.5]]), 0.0, 0.0).tolist() == [1.25, 0.0]


def test_python_nondominated_by_hand():
    pts = np.array([[1.0, 1.0], [2.0, 0.5], [0.5, 0.5], [1.0, 1.0]])
    assert py.nondominated_mask(pts).tolist() == [True, True, False, True]


@needs_ext
def test_backend_selected():
    assert kernels.BACKEND == "cython"


@needs_ext
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(0, 40), k=st.integers(0, 30))
def test_hv_kernels_agree(seed, n, k):
    f = front(seed, n)
    ys = np.random.default_rng(seed + 1).random((k, 2)) * 1.2 - 0.1
    assert cy.hv2d_sorted(f, 0.0, 0.0) == pytest.approx(py.hv2d_sorted(f, 0.0, 0.0), abs=1e-14)
    np.testing.assert_allclose(cy.hvi2d(f, ys, 0.0, 0.0), py.hvi2d(f, ys, 0.0, 0.0), atol=1e-14)


@needs_ext
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(0, 60), m=st.integers(1, 4))
def test_nondominated_agree(seed, n, m):
    pts = np.round(np.random.default_rng(seed).random((n, m)), 1)  # rounding creates ties
    np.testing.assert_array_equal(np.asarray(cy.nondominated_mask(pts), dtype=bool),
                                  np.asarray(py.nondominated_mask(pts), dtype=bool))


@needs_ext
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 30), k=st.integers(1, 30), d=st.integers(1, 5))
def test_min_sqdist_agree(seed, n, k, d):
    r = np.random.default_rng(seed)
    a, b = r.standard_normal((n, d)), r.standard_normal((k, d))
    np.testing.assert_allclose(cy.min_sqdist(a, b), py.min_sqdist(a, b), rtol=1e-12, atol=1e-14)
    brute = np.min(((a[:, None] - b[None]) ** 2).sum(-1), axis=1)
    np.testing.assert_allclose(py.min_sqdist(a, b), brute, rtol=1e-12, atol=1e-14)


def test_pure_python_switch(tmp_path):
    import subprocess
    import sys
    code = "import mopadgan.kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"MOPADGAN_PURE_PYTHON": "1", "PATH": ""}, check=True)
    assert out.stdout.strip() == "python"
