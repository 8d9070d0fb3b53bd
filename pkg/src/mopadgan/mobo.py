"""Multi-objective Bayesian optimization over a box (maximization).

Latin hypercube initial design, one independent squared-exponential GP per
objective, and Monte-Carlo expected hypervolume improvement maximized by
uniform random search over candidates.
"""
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import kernels
from .errors import DegenerateTargets, DimensionMismatch, NotPositiveDefinite
from .linalg import cholesky, log_det_psd, solve_psd

LENGTHSCALE_FACTORS = np.geomspace(0.05, 1.0, 5)  # times the per-dimension input span
SIGNAL_VARIANCES = np.geomspace(0.1, 10.0, 5)  # standardized-target units
NOISE_LEVELS = (1e-6, 1e-4, 1e-2)  # times the (unit) standardized target variance


@dataclass
class OptimizationProblem:
    """``objective(z) -> (design x, performance f)`` on the box ``bounds``.

    Constraint callbacks are carried for completeness; the optimizer only
    enforces the box.
    """

    objective: object
    bounds: np.ndarray
    n_objectives: int = 2
    design_dim: int = None
    inequality_constraints: tuple = ()
    equality_constraints: tuple = ()

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=np.float64).reshape(-1, 2)
        if np.any(self.bounds[:, 0] >= self.bounds[:, 1]):
            raise ValueError("every lower bound must be below its upper bound")
        if self.n_objectives < 1:
            raise ValueError("need at least one objective")

    @property
    def dim(self):
        return len(self.bounds)


@dataclass
class GpModel:
    inputs: np.ndarray
    targets: np.ndarray
    lengthscales: np.ndarray
    signal_variance: float  # standardized units
    noise_variance: float  # standardized units
    y_mean: float
    y_std: float
    factor: object
    alpha: np.ndarray
    log_marginal_likelihood: float
    degenerate: bool = False


@dataclass
class EvaluationRecord:
    z: np.ndarray
    x: np.ndarray
    f: np.ndarray
    eval_index: int
    failed: bool = False


@dataclass
class ParetoArchive:
    ref: np.ndarray
    records: list = field(default_factory=list)
    pareto: list = field(default_factory=list)
    hv_history: list = field(default_factory=list)

    def add(self, record):
        self.records.append(record)
        ok = [i for i, r in enumerate(self.records) if not r.failed]
        if ok:
            fs = np.array([self.records[i].f for i in ok])
            nd = non_dominated(fs)
            self.pareto = [ok[i] for i in nd]
            self.hv_history.append(hypervolume(fs[nd], self.ref))
        else:
            self.pareto = []
            self.hv_history.append(0.0)

    @property
    def front(self):
        return np.array([self.records[i].f for i in self.pareto]).reshape(-1, len(self.ref))

    @property
    def z(self):
        return np.array([r.z for r in self.records])

    @property
    def f(self):
        return np.array([r.f for r in self.records])


# -- design of experiments ---------------------------------------------------

def latin_hypercube(n, d, bounds, seed):
    """One point per equal-width stratum in every 1-d projection, jittered within strata."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    bounds = np.asarray(bounds, dtype=np.float64).reshape(-1, 2)
    if len(bounds) == 1 and d > 1:
        bounds = np.repeat(bounds, d, axis=0)
    rng = np.random.default_rng(seed)
    u = np.empty((n, d))
    for j in range(d):
        u[:, j] = (rng.permutation(n) + rng.random(n)) / n
    return bounds[:, 0] + u * (bounds[:, 1] - bounds[:, 0])


# -- Gaussian processes ------------------------------------------------------

def _sq_dists(a, b, ls):
    a = a / ls
    b = b / ls
    d = np.sum(a * a, 1)[:, None] + np.sum(b * b, 1)[None, :] - 2.0 * a @ b.T
    return np.maximum(d, 0.0)


def gp_fit(inputs, targets):
    """Fit a squared-exponential GP by grid search on the log marginal likelihood.

    Targets are standardized internally. The grid scans a shared lengthscale
    (5 multiples of each input dimension's span) x 5 signal variances x 3
    noise levels; ties keep the first grid point. Constant targets give a
    constant-mean model flagged ``degenerate`` (with a DegenerateTargets warning).
    """
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64).ravel()
    if x.ndim == 1:
        x = x[:, None]
    n = len(y)
    if n < 1 or x.shape[0] != n:
        raise DimensionMismatch(f"inputs {x.shape} vs targets {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets must be finite")
    y_mean = float(np.mean(y))
    y_std = float(np.std(y))
    degenerate = not y_std > 1e-12 * max(1.0, abs(y_mean))
    if degenerate:
        warnings.warn("GP targets have zero variance; using a constant-mean model",
                      DegenerateTargets, stacklevel=2)
        y_std = 1.0
    ys = (y - y_mean) / y_std
    span = np.ptp(x, axis=0)
    span[span <= 0] = 1.0

    best = None
    for fac in LENGTHSCALE_FACTORS:
        ls = fac * span
        base = np.exp(-0.5 * _sq_dists(x, x, ls))
        for sv in SIGNAL_VARIANCES:
            for noise in NOISE_LEVELS:
                gram = sv * base + noise * np.eye(n)
                try:
                    factor = cholesky(gram, 1e-10)
                except NotPositiveDefinite:
                    continue
                alpha = solve_psd(factor, ys)
                lml = -0.5 * ys @ alpha - 0.5 * log_det_psd(factor) - 0.5 * n * np.log(2 * np.pi)
                if best is None or lml > best[0]:
                    best = (lml, ls, sv, noise, factor, alpha)
    if best is None:
        raise NotPositiveDefinite("no grid point gave a factorable Gram matrix")
    lml, ls, sv, noise, factor, alpha = best
    return GpModel(x, y, ls, float(sv), float(noise), y_mean, y_std, factor, alpha,
                   float(lml), degenerate)


def gp_predict(model, z):
    """Posterior mean and (latent, noise-free) variance at one point or rows of points."""
    z = np.asarray(z, dtype=np.float64)
    single = z.ndim == 1
    zz = z[None, :] if single else z
    if zz.shape[1] != model.inputs.shape[1]:
        raise DimensionMismatch(f"query dim {zz.shape[1]} != model dim {model.inputs.shape[1]}")
    ks = model.signal_variance * np.exp(-0.5 * _sq_dists(zz, model.inputs, model.lengthscales))
    mean = ks @ model.alpha
    v = solve_triangular(model.factor.lower, ks.T, lower=True, check_finite=False)
    var = np.maximum(model.signal_variance - np.sum(v * v, axis=0), 0.0)
    mean = model.y_mean + model.y_std * mean
    var = model.y_std**2 * var
    if single:
        return float(mean[0]), float(var[0])
    return mean, var


# -- Pareto sets and hypervolume ---------------------------------------------

def non_dominated(points):
    """Indices of maximal points (a dominates b iff a >= b everywhere and a != b)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return []
    pts = pts.reshape(len(pts), -1)
    return [int(i) for i in np.flatnonzero(kernels.nondominated_mask(pts))]


def hypervolume_2d(points, ref):
    """Exact area dominated by ``points`` and bounded below by ``ref``."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    ref = np.asarray(ref, dtype=np.float64)
    pts = pts[np.all(pts > ref, axis=1)]
    if len(pts) == 0:
        return 0.0
    order = np.argsort(-pts[:, 0], kind="stable")
    return kernels.hv2d_sorted(pts[order], ref[0], ref[1])


def hypervolume(points, ref, mc_samples=1_000_000, seed=0):
    """Exact for two objectives; Monte-Carlo box sampling otherwise (slower, approximate)."""
    ref = np.asarray(ref, dtype=np.float64)
    if len(ref) == 2:
        return hypervolume_2d(points, ref)
    from .metrics import hypervolume_mc
    return hypervolume_mc(points, ref, mc_samples, np.random.default_rng(seed))


def prepare_front(points, ref):
    """Non-dominated points strictly above ``ref``, sorted by f1 descending."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    ref = np.asarray(ref, dtype=np.float64)
    pts = pts[np.all(pts > ref, axis=1)]
    if len(pts) == 0:
        return pts
    pts = pts[non_dominated(pts)]
    pts = np.unique(pts, axis=0)
    return np.ascontiguousarray(pts[np.lexsort((pts[:, 1], -pts[:, 0]))])


def hypervolume_improvement(front, ys, ref):
    """``HV(front + {y}) - HV(front)`` for every row ``y``."""
    ref = np.asarray(ref, dtype=np.float64)
    return kernels.hvi2d(prepare_front(front, ref), np.asarray(ys, dtype=np.float64), ref[0], ref[1])


# -- acquisition ---------------------------------------------------------------

def _check_two(models):
    if len(models) != 2:
        raise ValueError("Monte-Carlo EHVI is implemented for two objectives")


def ehvi_mc(models, archive_front, z, ref, n_samples, rng):
    """Monte-Carlo expected hypervolume improvement at one latent point."""
    _check_two(models)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    normals = rng.standard_normal((n_samples, len(models)))
    return float(ehvi_mc_batch(models, archive_front, np.atleast_2d(z), ref, normals)[0])


def ehvi_mc_batch(models, archive_front, zs, ref, normals):
    """EHVI for each row of ``zs``, all candidates sharing the same standard-normal draws."""
    _check_two(models)
    ref = np.asarray(ref, dtype=np.float64)
    front = prepare_front(archive_front, ref)
    stats = [gp_predict(m, zs) for m in models]
    mean = np.column_stack([s[0] for s in stats])
    sd = np.sqrt(np.column_stack([s[1] for s in stats]))
    draws = mean[:, None, :] + sd[:, None, :] * normals[None, :, :]
    hvi = kernels.hvi2d(front, draws.reshape(-1, 2), ref[0], ref[1])
    return hvi.reshape(len(zs), len(normals)).mean(axis=1)


def scoring_threads():
    env = os.environ.get("PADGAN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def propose_next(models, archive, problem, n_candidates, rng, n_samples=128, threads=None):
    """Best of ``n_candidates`` uniform points under MC-EHVI; ties go to the lowest index."""
    if n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    lo, hi = problem.bounds[:, 0], problem.bounds[:, 1]
    cands = lo + (hi - lo) * rng.random((n_candidates, problem.dim))
    seen = {tuple(r.z) for r in archive.records}
    for i in range(n_candidates):
        while tuple(cands[i]) in seen:
            cands[i] = lo + (hi - lo) * rng.random(problem.dim)
    normals = rng.standard_normal((n_samples, len(models)))
    front = archive.front
    threads = scoring_threads() if threads is None else threads
    chunks = np.array_split(np.arange(n_candidates), min(threads, n_candidates))
    if len(chunks) > 1:
        with ThreadPoolExecutor(len(chunks)) as pool:
            parts = list(pool.map(lambda c: ehvi_mc_batch(models, front, cands[c], archive.ref, normals), chunks))
    else:
        parts = [ehvi_mc_batch(models, front, cands, archive.ref, normals)]
    scores = np.concatenate(parts)
    return cands[int(np.argmax(scores))]


# -- main loop -----------------------------------------------------------------

def _evaluate(problem, z, index, ref):
    try:
        x, f = problem.objective(z)
        f = np.asarray(f, dtype=np.float64).ravel()
        if f.shape != (problem.n_objectives,) or not np.all(np.isfinite(f)):
            raise ValueError(f"objective returned {f!r}")
        return EvaluationRecord(np.array(z), np.asarray(x, dtype=np.float64).ravel(), f, index)
    except Exception:  # noqa: BLE001 - failed evaluations are archived at the reference point
        dim = problem.design_dim if problem.design_dim is not None else problem.dim
        return EvaluationRecord(np.array(z), np.full(dim, np.nan), np.array(ref, dtype=np.float64),
                                index, failed=True)


def fit_models(archive, n_objectives):
    recs = [r for r in archive.records if not r.failed] or archive.records
    z = np.array([r.z for r in recs])
    f = np.array([r.f for r in recs])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateTargets)
        return [gp_fit(z, f[:, m]) for m in range(n_objectives)]


def optimize(problem, n_init=5, n_iter=50, ref=(0.0, 0.0), seed=0, n_candidates=1000,
             mc_samples=128, threads=None, callback=None):
    """LHS initial design followed by ``n_iter`` EHVI-guided evaluations."""
    if n_init < 1 or n_iter < 0:
        raise ValueError("n_init must be >= 1 and n_iter >= 0")
    ref = np.asarray(ref, dtype=np.float64)
    if len(ref) != problem.n_objectives:
        raise DimensionMismatch("reference point length != number of objectives")
    lhs_seed, loop_seed = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(loop_seed)
    archive = ParetoArchive(ref)
    for z in latin_hypercube(n_init, problem.dim, problem.bounds, lhs_seed):
        archive.add(_evaluate(problem, z, len(archive.records), ref))
    for _ in range(n_iter):
        models = fit_models(archive, problem.n_objectives)
        z = propose_next(models, archive, problem, n_candidates, rng, mc_samples, threads)
        archive.add(_evaluate(problem, z, len(archive.records), ref))
        if callback is not None:
            callback(archive)
    return archive
