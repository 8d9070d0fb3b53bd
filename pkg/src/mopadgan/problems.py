"""Synthetic two-parameter, two-objective test problems and their datasets.

Both problems are maximized over the box [-0.5, 0.5]^2:

* modified KNO1, evaluated in shifted coordinates ``x' = x / 3 - 0.5``;
  its Pareto set is the line ``x1' + x2' = 0.4705``;
* modified VLMOP2, two Gaussian bumps centred at +-(1/sqrt 2, 1/sqrt 2);
  its Pareto set is the diagonal ``x1 = x2``.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .errors import SingularInput

INV_SQRT2 = 1.0 / np.sqrt(2.0)
KNO1_FRONT_OFFSET = 0.4705
FD_STEP = 1e-6


class BenchmarkId(str, enum.Enum):
    KNO1 = "kno1"
    VLMOP2 = "vlmop2"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown benchmark {value!r}; choose kno1 or vlmop2") from None


@dataclass(frozen=True)
class ClusterDataSpec:
    n_points: int = 10_000
    n_clusters: int = 8
    circle_radius: float = 0.35
    cluster_std: float = 0.04
    box: tuple = (-0.5, 0.5)
    seed: int = 0

    def __post_init__(self):
        if self.n_clusters < 1 or self.n_points < self.n_clusters:
            raise ValueError("need n_points >= n_clusters >= 1")
        lo, hi = self.box
        if not (lo < -self.circle_radius and self.circle_radius < hi):
            raise ValueError("cluster centres must lie inside the box")
        if self.cluster_std < 0:
            raise ValueError("cluster_std must be >= 0")

    def centers(self):
        angles = 2.0 * np.pi * np.arange(self.n_clusters) / self.n_clusters
        return self.circle_radius * np.column_stack([np.cos(angles), np.sin(angles)])


def make_cluster_data(spec):
    """Gaussian clusters on a circle; points assigned round-robin, redrawn until inside the box."""
    rng = np.random.default_rng(spec.seed)
    centers = spec.centers()
    lo, hi = spec.box
    labels = np.arange(spec.n_points) % spec.n_clusters
    pts = centers[labels].copy()
    if spec.cluster_std == 0:
        return pts
    todo = np.arange(spec.n_points)
    while todo.size:
        pts[todo] = centers[labels[todo]] + spec.cluster_std * rng.standard_normal((todo.size, 2))
        inside = np.all((pts[todo] >= lo) & (pts[todo] <= hi), axis=1)
        todo = todo[~inside]
    return pts


def kno1(x_prime):
    """Modified KNO1 objectives for one point or a batch of points (rows).

    Raises:
        SingularInput: where ``x1 + x2 == 0`` in unshifted coordinates.
    """
    xp = np.asarray(x_prime, dtype=np.float64)
    x = 3.0 * (xp + 0.5)
    s = x[..., 0] + x[..., 1]
    if np.any(s == 0.0):
        raise SingularInput("KNO1 is undefined where x1 + x2 = 0 (x' = (-0.5, -0.5))")
    r = 9.0 - (3.0 * np.sin(5.0 / (2.0 * s * s)) + 3.0 * np.sin(4.0 * s) + 5.0 * np.sin(2.0 * s + 2.0))
    phi = np.pi * (x[..., 0] - x[..., 1] + 3.0) / 12.0
    return np.stack([r / 20.0 * np.cos(phi), r / 20.0 * np.sin(phi)], axis=-1)


def vlmop2(x):
    x = np.asarray(x, dtype=np.float64)
    a = x - INV_SQRT2
    b = x + INV_SQRT2
    f1 = np.exp(-a[..., 0] ** 2 - a[..., 1] ** 2)
    f2 = np.exp(-b[..., 0] ** 2 - b[..., 1] ** 2)
    return np.stack([f1, f2], axis=-1)


OBJECTIVES = {BenchmarkId.KNO1: kno1, BenchmarkId.VLMOP2: vlmop2}


def objective(benchmark):
    return OBJECTIVES[BenchmarkId.parse(benchmark)]


def estimator_jacobian(benchmark, x, h=FD_STEP):
    """Central-difference Jacobian(s), shape (..., M, D) for input (..., D)."""
    if h <= 0:
        raise ValueError("h must be > 0")
    bid = BenchmarkId.parse(benchmark)
    fn = OBJECTIVES[bid]
    x = np.asarray(x, dtype=np.float64)
    if bid is BenchmarkId.KNO1:
        s = 3.0 * (x[..., 0] + 0.5) + 3.0 * (x[..., 1] + 0.5)
        # within 2h of the locus in x' units; s moves 3h per unit step of h
        if np.any(np.abs(s) <= 6.0 * h):
            raise SingularInput("finite-difference stencil touches the KNO1 singular locus")
    d = x.shape[-1]
    cols = []
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        cols.append((fn(x + e) - fn(x - e)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def make_estimator(benchmark, h=FD_STEP):
    """Performance estimator ``batch -> (perf (B, M), jacobians (B, M, D))``."""
    bid = BenchmarkId.parse(benchmark)
    fn = OBJECTIVES[bid]

    def evaluate(batch):
        batch = np.asarray(batch, dtype=np.float64)
        return fn(batch), estimator_jacobian(bid, batch, h)

    evaluate.benchmark = bid
    evaluate.n_objectives = 2
    return evaluate


def pareto_line_distance(benchmark, x):
    """Distance from a point (or rows) to the known Pareto-set line in parameter space."""
    bid = BenchmarkId.parse(benchmark)
    x = np.asarray(x, dtype=np.float64)
    if bid is BenchmarkId.KNO1:
        return np.abs(x[..., 0] + x[..., 1] - KNO1_FRONT_OFFSET) / np.sqrt(2.0)
    return np.abs(x[..., 0] - x[..., 1]) / np.sqrt(2.0)


def nudge_off_singularity(benchmark, x, eps=1e-9):
    """Shift KNO1 inputs sitting exactly on the singular locus by ``eps``."""
    x = np.array(x, dtype=np.float64)
    if BenchmarkId.parse(benchmark) is BenchmarkId.KNO1:
        on = 3.0 * (x[..., 0] + 0.5) + 3.0 * (x[..., 1] + 0.5) == 0.0
        x[on] += eps
    return x
