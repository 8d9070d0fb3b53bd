"""Performance-augmented DPP loss on a batch of generated designs.

The batch kernel is ``L[i, j] = k(x_i, x_j) * (q_i * q_j) ** gamma0`` with an
RBF similarity ``k`` and scalar qualities ``q`` obtained by linear
scalarization of a performance vector. The loss is ``-log det(L) / |B|``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import cholesky, inverse_psd, log_det_psd

KERNEL_JITTER = 1e-6
# squared Cholesky pivots below this fraction of the largest diagonal entry mean
# log det is dominated by roundoff; such batches get jitter
KERNEL_MIN_PIVOT_RATIO = 1e-10


@dataclass(frozen=True)
class QualityConfig:
    gamma0: float = 2.0
    weights: tuple = (0.5, 0.5)
    bandwidth: float = 1.0
    quality_floor: float = 1e-6
    use_realisticity_weighting: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", tuple(float(v) for v in w))
        if self.gamma0 < 0:
            raise ValueError("gamma0 must be >= 0")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must be non-negative and sum to 1, got {self.weights}")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be > 0")
        if not 0.0 < self.quality_floor <= 1.0:
            raise ValueError("quality_floor must lie in (0, 1]")


@dataclass
class DppKernel:
    matrix: np.ndarray
    qualities: np.ndarray
    similarities: np.ndarray
    factor: object  # CholFactor


@dataclass
class PadLossGrads:
    d_loss_d_x: np.ndarray
    d_loss_d_q: np.ndarray


def rbf_similarity(xi, xj, bandwidth=1.0):
    xi = np.asarray(xi, dtype=np.float64)
    xj = np.asarray(xj, dtype=np.float64)
    if xi.shape != xj.shape:
        raise DimensionMismatch(f"{xi.shape} vs {xj.shape}")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be > 0")
    d = xi - xj
    return float(np.exp(-0.5 * np.dot(d, d) / bandwidth**2))


def rbf_matrix(x, bandwidth=1.0):
    diff = x[:, None, :] - x[None, :, :]
    return np.exp(-0.5 * np.sum(diff * diff, axis=2) / bandwidth**2)


def sample_simplex_weights(m, rng):
    """Uniform draw from the probability simplex via normalized exponentials."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return np.ones(1)
    e = rng.exponential(size=m)
    return e / e.sum()


def aggregate_quality(p, cfg):
    """Linear scalarization ``w . p``, clamped below at the quality floor.

    Accepts a single performance vector or a batch (rows).
    """
    p = np.asarray(p, dtype=np.float64)
    w = np.asarray(cfg.weights)
    if p.shape[-1] != w.size:
        raise DimensionMismatch(f"performance length {p.shape[-1]} != weights length {w.size}")
    q = np.maximum(p @ w, cfg.quality_floor)
    return float(q) if q.ndim == 0 else q


def realisticity_weighted_quality(q_raw, d_out):
    return q_raw * d_out


def gamma1_schedule(t, t_total, gamma1_final, steepness):
    """Escalating DPP weight ``gamma1_final * (t / t_total) ** steepness``."""
    if steepness <= 0:
        raise ValueError("steepness must be > 0")
    if not 0 <= t <= t_total:
        raise ValueError(f"t={t} outside [0, {t_total}]")
    if t_total == 0:
        return float(gamma1_final)
    return float(gamma1_final * (t / t_total) ** steepness)


def build_dpp_kernel(batch, qualities, cfg):
    x = np.asarray(batch, dtype=np.float64)
    q = np.asarray(qualities, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != q.shape[0]:
        raise DimensionMismatch(f"batch {x.shape} vs qualities {q.shape}")
    if len(q) < 2:
        raise ValueError("need at least two samples to form a DPP kernel")
    if np.any(q < cfg.quality_floor):
        raise ValueError("qualities must be >= quality_floor")
    sim = rbf_matrix(x, cfg.bandwidth)
    qq = np.outer(q, q)
    mat = sim * qq**cfg.gamma0 if cfg.gamma0 != 0 else sim.copy()
    return DppKernel(mat, q, sim, cholesky(mat, KERNEL_JITTER, KERNEL_MIN_PIVOT_RATIO))


def pad_loss(kernel, batch_size=None):
    n = kernel.matrix.shape[0]
    if batch_size is not None and batch_size != n:
        raise DimensionMismatch(f"batch_size {batch_size} != kernel dim {n}")
    return -log_det_psd(kernel.factor) / n


def quality_gradients(jacobians, weights):
    """``dq/dx = w^T dp/dx`` for per-sample (M x D) performance Jacobians."""
    return np.einsum("m,bmd->bd", np.asarray(weights), np.asarray(jacobians))


def pad_loss_grads(batch, qualities, quality_jacobians, kernel, cfg, clamped=None):
    """Analytic gradients of :func:`pad_loss` w.r.t. designs and qualities.

    Args:
        batch: (B, D) designs the kernel was built from.
        qualities: (B,) qualities (already floored).
        quality_jacobians: either (B, M, D) performance Jacobians, mapped
            through ``cfg.weights``, or (B, D) quality gradients ``dq/dx``.
        kernel: the :class:`DppKernel` for this batch.
        cfg: quality settings.
        clamped: optional (B,) mask of samples whose quality sits at the floor;
            defaults to ``qualities <= cfg.quality_floor``.

    Returns:
        PadLossGrads with ``d_loss_d_x`` holding the full design gradient
        (similarity path plus quality path) and ``d_loss_d_q`` the partials
        with respect to each quality.
    """
    x = np.asarray(batch, dtype=np.float64)
    q = np.asarray(qualities, dtype=np.float64)
    jac = np.asarray(quality_jacobians, dtype=np.float64)
    n, d = x.shape
    if q.shape != (n,) or kernel.matrix.shape != (n, n):
        raise DimensionMismatch("batch, qualities and kernel sizes disagree")
    if jac.ndim == 3:
        if jac.shape[0] != n or jac.shape[2] != d or jac.shape[1] != len(cfg.weights):
            raise DimensionMismatch(f"jacobians {jac.shape} incompatible with batch {x.shape}")
        dq_dx = quality_gradients(jac, cfg.weights)
    elif jac.shape == (n, d):
        dq_dx = jac
    else:
        raise DimensionMismatch(f"quality_jacobians shape {jac.shape} not understood")
    if clamped is None:
        clamped = q <= cfg.quality_floor

    # d(-log det L)/dL = -L^{-1}, scaled by 1/|B|; L here includes any jitter
    g = -inverse_psd(kernel.factor) / n
    gl = g * kernel.matrix  # elementwise; L's off-diagonals carry all x-dependence via k

    if cfg.gamma0 != 0:
        d_q = 2.0 * cfg.gamma0 * gl.sum(axis=1) / q
    else:
        d_q = np.zeros(n)

    # dk_ij/dx_i = -(x_i - x_j) / bw^2 * k_ij ; both (i,j) and (j,i) entries contribute
    diff = x[:, None, :] - x[None, :, :]
    d_x = -2.0 / cfg.bandwidth**2 * np.einsum("ij,ijd->id", gl, diff)
    d_x = d_x + np.where(clamped, 0.0, d_q)[:, None] * dq_dx
    return PadLossGrads(d_x, d_q)
