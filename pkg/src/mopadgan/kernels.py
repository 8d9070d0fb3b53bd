"""Backend selection for the hot kernels.

The compiled Cython module is used when it was built; otherwise the numpy
fallback is imported. Setting ``MOPADGAN_PURE_PYTHON=1`` forces the fallback.
Both backends share one signature per function:

``hv2d_sorted(pts, r1, r2)``
    Dominated area of points already sorted by the first objective, descending.
``hvi2d(front, ys, r1, r2)``
    Exact hypervolume improvement of every row of ``ys`` over a sorted,
    mutually non-dominated ``front``.
``nondominated_mask(pts)``
    Maximal rows under componentwise ``>=`` dominance (maximization).
``min_sqdist(a, b)``
    Squared distance from every row of ``a`` to its nearest row of ``b``.
"""
import os

import numpy as np

from . import _kernels_py as python_backend

compiled_backend = None
if not os.environ.get("MOPADGAN_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"


def _c2d(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def hv2d_sorted(pts, r1, r2):
    return float(_impl.hv2d_sorted(_c2d(pts).reshape(-1, 2), float(r1), float(r2)))


def hvi2d(front, ys, r1, r2):
    return _impl.hvi2d(_c2d(front).reshape(-1, 2), _c2d(ys).reshape(-1, 2), float(r1), float(r2))


def nondominated_mask(pts):
    pts = _c2d(pts)
    if pts.ndim != 2:
        pts = pts.reshape(len(pts), -1)
    return _impl.nondominated_mask(pts)


def min_sqdist(a, b):
    return _impl.min_sqdist(_c2d(a), _c2d(b))
