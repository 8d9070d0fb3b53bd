"""Pure-Python (numpy) versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def hv2d_sorted(pts, r1, r2):
    pts = np.asarray(pts, dtype=np.float64)
    if len(pts) == 0:
        return 0.0
    best2 = np.maximum.accumulate(pts[:, 1])
    nxt = np.maximum(np.append(pts[1:, 0], r1), r1)
    width = pts[:, 0] - nxt
    height = best2 - r2
    ok = (width > 0) & (height > 0)
    return float(np.sum(width[ok] * height[ok]))


def hvi2d(front, ys, r1, r2):
    front = np.asarray(front, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    y1 = ys[:, :1]
    y2 = ys[:, 1:]
    c1 = np.minimum(front[None, :, 0], y1)
    c2 = np.minimum(front[None, :, 1], y2)
    c1n = np.concatenate([c1[:, 1:], np.full((len(ys), 1), r1)], axis=1)
    dom = np.sum((c1 - c1n) * (c2 - r2), axis=1)
    box = (ys[:, 0] - r1) * (ys[:, 1] - r2)
    out = np.where(box > dom, box - dom, 0.0)
    out[(ys[:, 0] <= r1) | (ys[:, 1] <= r2)] = 0.0
    return out


def nondominated_mask(pts):
    pts = np.asarray(pts, dtype=np.float64)
    n = len(pts)
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        ge = np.all(pts >= pts[i], axis=1)
        gt = np.any(pts > pts[i], axis=1)
        if np.any(ge & gt):
            keep[i] = False
    return keep


def min_sqdist(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.empty(len(a))
    # chunked so the (chunk, nb) distance block stays small
    step = max(1, 2_000_000 // max(len(b), 1))
    for s in range(0, len(a), step):
        diff = a[s:s + step, None, :] - b[None, :, :]
        out[s:s + step] = np.min(np.sum(diff * diff, axis=2), axis=1)
    return out
