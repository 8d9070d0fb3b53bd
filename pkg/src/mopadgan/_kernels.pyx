# cython: language_level=3
"""Compiled inner loops for Pareto filtering, hypervolume and set distances.

Every function here has a line-for-line counterpart in ``_kernels_py``; the
public entry point is :mod:`mopadgan.kernels`, which picks one at import.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def hv2d_sorted(const double[:, ::1] pts, double r1, double r2):
    """Area dominated by ``pts`` (sorted by f1 descending) above ``(r1, r2)``."""
    cdef Py_ssize_t n = pts.shape[0], i
    cdef double area = 0.0, best2 = r2, nxt
    with nogil:
        for i in range(n):
            if pts[i, 1] > best2:
                best2 = pts[i, 1]
            nxt = pts[i + 1, 0] if i + 1 < n else r1
            if nxt < r1:
                nxt = r1
            if pts[i, 0] > nxt and best2 > r2:
                area += (pts[i, 0] - nxt) * (best2 - r2)
    return area


def hvi2d(const double[:, ::1] front, const double[:, ::1] ys, double r1, double r2):
    """Exact hypervolume improvement of each row of ``ys`` over ``front``.

    ``front`` must be mutually non-dominated, strictly above the reference
    point and sorted by f1 descending (hence f2 ascending).
    """
    cdef Py_ssize_t k = front.shape[0], n = ys.shape[0], i, j
    cdef double y1, y2, box, dom, c1, c2, c1n
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for i in range(n):
            y1 = ys[i, 0]
            y2 = ys[i, 1]
            if y1 <= r1 or y2 <= r2:
                continue
            box = (y1 - r1) * (y2 - r2)
            dom = 0.0
            for j in range(k):
                c1 = front[j, 0] if front[j, 0] < y1 else y1
                c2 = front[j, 1] if front[j, 1] < y2 else y2
                if j + 1 < k:
                    c1n = front[j + 1, 0] if front[j + 1, 0] < y1 else y1
                else:
                    c1n = r1
                dom += (c1 - c1n) * (c2 - r2)
            if box > dom:
                res[i] = box - dom
    return out


def nondominated_mask(const double[:, ::1] pts):
    """Boolean mask of maximal rows under componentwise >= dominance."""
    cdef Py_ssize_t n = pts.shape[0], m = pts.shape[1], i, j, c
    cdef bint ge, gt
    mask = np.ones(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] keep = mask
    with nogil:
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                ge = True
                gt = False
                for c in range(m):
                    if pts[j, c] < pts[i, c]:
                        ge = False
                        break
                    if pts[j, c] > pts[i, c]:
                        gt = True
                if ge and gt:
                    keep[i] = 0
                    break
    return mask.astype(bool)


def min_sqdist(const double[:, ::1] a, const double[:, ::1] b):
    """For each row of ``a`` the squared Euclidean distance to its nearest row of ``b``."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], d = a.shape[1], i, j, c
    cdef double best, acc, diff
    out = np.empty(na, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for i in range(na):
            best = INFINITY
            for j in range(nb):
                acc = 0.0
                for c in range(d):
                    diff = a[i, c] - b[j, c]
                    acc = acc + diff * diff
                    if acc >= best:
                        break
                if acc < best:
                    best = acc
            res[i] = best
    return out
