"""Dense symmetric positive-(semi)definite linear algebra.

Cholesky with a bounded jitter ladder, log-determinant and solves. These back
the DPP loss (log det of the batch kernel and its inverse) and GP regression.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .errors import DimensionMismatch, NotPositiveDefinite

JITTER_DECADES = 7  # base, 10*base, ..., 1e6*base


@dataclass(frozen=True)
class CholFactor:
    """Lower Cholesky factor of ``A + jitter_used * I``."""

    lower: np.ndarray
    jitter_used: float = 0.0

    @property
    def dim(self):
        return self.lower.shape[0]


def jitter_ladder(base_jitter):
    ladder = [0.0]
    if base_jitter > 0:
        ladder += [base_jitter * 10.0**k for k in range(JITTER_DECADES)]
    return ladder


def cholesky(a, base_jitter=0.0, min_pivot_ratio=0.0):
    """Factor a symmetric matrix, escalating diagonal jitter until it succeeds.

    Tries jitter 0 first, then ``base_jitter * 10**k`` for k = 0..6 and keeps
    the first success. A factorization only counts as a success when every
    squared pivot is at least ``min_pivot_ratio`` times the largest diagonal
    entry; a positive ratio rejects matrices that factor only by roundoff.

    Raises:
        NotPositiveDefinite: if every step of the ladder fails.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if base_jitter < 0:
        raise ValueError("base_jitter must be non-negative")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not symmetric")
    eye = np.eye(a.shape[0])
    for jitter in jitter_ladder(base_jitter):
        try:
            lower = np.linalg.cholesky(a + jitter * eye if jitter else a)
        except np.linalg.LinAlgError:
            continue
        piv = np.diag(lower)
        if not (np.all(piv > 0) and np.all(np.isfinite(lower))):
            continue
        if min_pivot_ratio > 0 and np.min(piv) ** 2 < min_pivot_ratio * (np.max(np.diag(a)) + jitter):
            continue
        return CholFactor(lower, jitter)
    raise NotPositiveDefinite(
        f"matrix of size {a.shape[0]} not positive definite with jitter up to "
        f"{jitter_ladder(base_jitter)[-1]:g}"
    )


def log_det_psd(factor):
    return 2.0 * float(np.sum(np.log(np.diag(factor.lower))))


def solve_psd(factor, b):
    """Solve ``(A + jitter_used * I) x = b`` for a vector or matrix ``b``."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != factor.dim:
        raise DimensionMismatch(f"rhs has {b.shape[0]} rows, factor has dim {factor.dim}")
    return cho_solve((factor.lower, True), b, check_finite=False)


def inverse_psd(factor):
    return solve_psd(factor, np.eye(factor.dim))
