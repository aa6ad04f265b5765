"""Correction of the large-p largest-root law for a non-identity scale.

With a_i = tr(Sigma^i) / p, the factor b = a_1^2 / a_2 rescales the
asymptotic law to max eig{ (1/(p b)) W_q(m, I) }. The spectral moments can
be taken from a known Sigma or estimated consistently from a single
Wishart sample A ~ W_p(m, Sigma):

    a1_hat = tr A / (m p)
    a2_hat = [ tr(A^2) - (tr A)^2 / m ] / ( (m - 1) (m + 2) p )

Both traces come from the factor Z (A = Z Z^T): tr A = |Z|_F^2 and
tr A^2 = |Z^T Z|_F^2, so nothing p x p is ever formed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .beta_ensemble import EnsembleParams
from .exact_dist import wishart_max_cdf
from .sampling import ScaleMatrix, WishartSample

__all__ = [
    "DegenerateDof",
    "ScaleStats",
    "scale_moments_exact",
    "estimate_scale_moments",
    "theorem2_cdf",
    "load_data_matrix_csv",
]


class DegenerateDof(ValueError):
    """Too few degrees of freedom to estimate the second spectral moment."""


@dataclass(frozen=True)
class ScaleStats:
    """First two spectral moments of Sigma and the ratio b = a1^2 / a2.

    Cauchy-Schwarz forces b <= 1 for any true scale matrix; estimated
    values may exceed 1 slightly through sampling noise and are reported
    as-is (a warning is emitted at estimation time, never a clamp).
    """

    a1_hat: float
    a2_hat: float
    b: float

    def __post_init__(self):
        if not (self.a1_hat > 0.0 and self.a2_hat > 0.0 and self.b > 0.0):
            raise ValueError("spectral moments and b must be positive")


def _stats_from_moments(a1: float, a2: float) -> ScaleStats:
    return ScaleStats(a1_hat=a1, a2_hat=a2, b=a1 * a1 / a2)


def scale_moments_exact(scale: ScaleMatrix) -> ScaleStats:
    """a1 = tr Sigma / p, a2 = tr Sigma^2 / p computed directly from Sigma."""
    p = scale.order
    return _stats_from_moments(scale.trace() / p, scale.trace_square() / p)


def estimate_scale_moments(
    A_factor, m: int | None = None, p: int | None = None, realized: bool = False
) -> ScaleStats:
    """Consistent (a1, a2, b) estimates from one Wishart sample.

    ``A_factor`` may be a WishartSample, a p x m factor array, or -- with
    ``realized=True`` -- the p x p matrix A itself (as loaded from user
    data). m and p default to the factor's shape and are validated against
    it when given.
    """
    if isinstance(A_factor, WishartSample):
        Z = A_factor.factor
        if m is None:
            m = A_factor.dof
    else:
        Z = np.asarray(A_factor, dtype=float)
    if realized:
        A = np.asarray(Z, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("realized matrix must be square")
        if m is None:
            raise DegenerateDof("realized-matrix input needs an explicit dof m")
        if p is None:
            p = A.shape[0]
        if p != A.shape[0]:
            raise ValueError(f"p={p} does not match matrix order {A.shape[0]}")
        tr_a = float(np.trace(A))
        tr_a2 = float(np.sum(A * A))
    else:
        if Z.ndim != 2:
            raise ValueError("factor must be a 2-d array")
        if m is None:
            m = Z.shape[1]
        if p is None:
            p = Z.shape[0]
        if (p, m) != Z.shape:
            raise ValueError(f"factor shape {Z.shape} does not match (p={p}, m={m})")
        tr_a = float(np.sum(Z * Z))
        G = Z.T @ Z
        tr_a2 = float(np.sum(G * G))
    if m < 2:
        raise DegenerateDof("estimating a2 requires dof m >= 2")
    a1 = tr_a / (m * p)
    a2 = (tr_a2 - tr_a**2 / m) / ((m - 1) * (m + 2) * p)
    if a2 <= 0.0:
        raise DegenerateDof(
            "second spectral moment estimate is nonpositive "
            "(degenerate, e.g. exactly isotropic, sample)"
        )
    stats = _stats_from_moments(a1, a2)
    if stats.b > 1.0:
        warnings.warn(
            f"estimated b = {stats.b:.6g} exceeds its theoretical bound of 1 "
            "(sampling noise); value kept as-is",
            stacklevel=2,
        )
    return stats


def theorem2_cdf(params: EnsembleParams, stats: ScaleStats, x: float) -> float:
    """Scale-corrected large-p law: max eig{ (1/(p b)) W_q(m, I) }."""
    return wishart_max_cdf(params.q, params.m, params.p * stats.b * x)


def load_data_matrix_csv(path) -> np.ndarray:
    """Read a numeric data matrix (factor or realized) from headerless CSV."""
    return np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
