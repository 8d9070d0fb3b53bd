"""Evaluation metrics: set distances, novelty, mode coverage, Pareto proximity."""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EmptySet
from .problems import pareto_line_distance


@dataclass
class MetricReport:
    hypervolume: float
    pareto_fraction_near_line: float
    mode_coverage_count: int
    novelty_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_text(self, prefix=""):
        """Flat ``key = value`` lines."""
        nov = np.asarray(self.novelty_values, dtype=np.float64)
        lines = [
            f"{prefix}hypervolume = {self.hypervolume!r}",
            f"{prefix}pareto_fraction_near_line = {self.pareto_fraction_near_line!r}",
            f"{prefix}mode_coverage_count = {self.mode_coverage_count}",
            f"{prefix}novelty_count = {nov.size}",
        ]
        if nov.size:
            lines += [
                f"{prefix}novelty_mean = {float(nov.mean())!r}",
                f"{prefix}novelty_max = {float(nov.max())!r}",
                f"{prefix}novelty_values = " + ",".join(f"{v:.17g}" for v in nov),
            ]
        return "\n".join(lines) + "\n"


def _as_points(a):
    a = np.asarray(a, dtype=np.float64)
    return a.reshape(1, -1) if a.ndim == 1 else a


def directed_hausdorff(a, b):
    return float(np.sqrt(np.max(kernels.min_sqdist(a, b))))


def hausdorff(a, b):
    """Symmetric Hausdorff distance between two point sets (rows)."""
    a, b = _as_points(a), _as_points(b)
    if a.size == 0 or b.size == 0:
        raise EmptySet("Hausdorff distance needs two non-empty sets")
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"point dims {a.shape[1]} vs {b.shape[1]}")
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


def novelty_indicator(design, dataset):
    """Distance from a design to its nearest dataset member.

    ``design`` is a vector (then ``dataset`` is rows of vectors, and this is the
    nearest-neighbour Euclidean distance) or a point set (then ``dataset`` is a
    sequence of point sets compared by Hausdorff distance).
    """
    design = np.asarray(design, dtype=np.float64)
    if len(dataset) == 0:
        raise EmptySet("novelty needs a non-empty dataset")
    if design.ndim == 1:
        data = np.asarray(dataset, dtype=np.float64).reshape(len(dataset), -1)
        if data.shape[1] != design.size:
            raise DimensionMismatch(f"design dim {design.size} vs dataset dim {data.shape[1]}")
        return float(np.sqrt(kernels.min_sqdist(design[None, :], data)[0]))
    return min(hausdorff(design, member) for member in dataset)


def mode_coverage(samples, centers, radius):
    """Number of centers with at least one sample within ``radius``."""
    if radius <= 0:
        raise ValueError("radius must be > 0")
    samples = np.asarray(samples, dtype=np.float64)
    centers = _as_points(centers)
    if samples.size == 0:
        return 0
    d2 = kernels.min_sqdist(centers, _as_points(samples))
    return int(np.sum(d2 <= radius * radius))


def pareto_proximity(samples, benchmark, tol=0.05):
    """Fraction of samples within ``tol`` of the benchmark's Pareto-set line."""
    if tol <= 0:
        raise ValueError("tol must be > 0")
    samples = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
    if len(samples) == 0:
        return 0.0
    return float(np.mean(pareto_line_distance(benchmark, samples) <= tol))


def hypervolume_mc(points, ref, n_samples=1_000_000, rng=None):
    """Monte-Carlo hypervolume: uniform samples in the box [ref, max(points)]."""
    rng = np.random.default_rng(0) if rng is None else rng
    ref = np.asarray(ref, dtype=np.float64)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, len(ref))
    pts = pts[np.all(pts > ref, axis=1)]
    if len(pts) == 0:
        return 0.0
    upper = pts.max(axis=0)
    vol = float(np.prod(upper - ref))
    hits = 0
    chunk = 200_000
    for start in range(0, n_samples, chunk):
        m = min(chunk, n_samples - start)
        u = ref + (upper - ref) * rng.random((m, len(ref)))
        dominated = np.zeros(m, dtype=bool)
        for p in pts:
            dominated |= np.all(u <= p, axis=1)
        hits += int(dominated.sum())
    return vol * hits / n_samples
