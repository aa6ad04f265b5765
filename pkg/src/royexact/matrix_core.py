"""Dense numerical kernels shared by the distribution code.

Four primitives live here: the rank-revealing eigensystem of a Gram matrix
given only its tall factor, the Moore-Penrose pseudoinverse of a symmetric
PSD matrix, the Pfaffian of a skew-symmetric matrix, and the regularized
incomplete beta/gamma functions. Everything is plain float64 and dense;
the design envelope is matrix dimension up to a few thousand.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "RankDeficient",
    "EigenFactorization",
    "check_symmetric",
    "check_skew",
    "sym_eigen_rank",
    "pseudoinverse",
    "pfaffian",
    "pfaffian_sign_logmag",
    "reg_inc_beta",
    "reg_inc_gamma",
]


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the function."""


class RankDeficient(ValueError):
    """A factor matrix failed its numerical full-rank check.

    For Monte Carlo draws this signals a degenerate sample; the caller is
    expected to resample rather than recover in place.
    """


class EigenFactorization(NamedTuple):
    """Nonzero eigensystem of Z Z^T held in factored form.

    ``vectors`` is p x m column-orthonormal, ``roots`` the m positive
    eigenvalues in descending order, so that
    vectors @ diag(roots) @ vectors.T reconstructs Z Z^T.
    """

    vectors: np.ndarray
    roots: np.ndarray


def check_symmetric(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Validate entrywise symmetry and return the exactly symmetrized array.

    The tolerance is absolute for matrices of unit scale and relative for
    larger ones (scaled by the max absolute entry).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    if np.max(np.abs(M - M.T), initial=0.0) > tol * scale:
        raise DomainError("matrix is not symmetric within tolerance")
    return 0.5 * (M + M.T)


def check_skew(S: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Validate skew-symmetry (zero diagonal included) and skew-symmetrize."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {S.shape}")
    scale = max(1.0, float(np.max(np.abs(S))) if S.size else 1.0)
    if np.max(np.abs(S + S.T), initial=0.0) > tol * scale:
        raise DomainError("matrix is not skew-symmetric within tolerance")
    return 0.5 * (S - S.T)


def sym_eigen_rank(Z: np.ndarray) -> EigenFactorization:
    """Nonzero eigensystem of Z Z^T from the p x n factor Z alone.

    Returns H (the left singular vectors of Z) and L (the squared singular
    values, descending) without forming the p x p product. Computed from
    the n x n Gram matrix, which is exact for the well-conditioned factors
    arising from Gaussian sampling and an order of magnitude faster than a
    thin SVD for p >> n.

    Raises RankDeficient when the smallest singular value falls below
    max(p, n) * 1e-12 times the largest.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2:
        raise DomainError("Z must be a 2-d array")
    p, n = Z.shape
    if n > p:
        raise DomainError(f"factor must be tall: got {p} x {n}")
    G = Z.T @ Z
    w, W = np.linalg.eigh(G)
    idx = np.argsort(-w, kind="stable")  # stable so tied roots keep eigh's order
    w = w[idx]
    W = W[:, idx]
    rank_floor = (max(p, n) * 1e-12) ** 2 * max(w[0], 0.0)
    if w[-1] <= rank_floor or w[-1] <= 0.0:
        raise RankDeficient(
            f"smallest singular value below rank tolerance ({p} x {n} factor)"
        )
    H = (Z @ W) / np.sqrt(w)
    return EigenFactorization(vectors=H, roots=w)


def pseudoinverse(M: np.ndarray, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix.

    Eigenvalues at or below ``rank_tol * max(eigenvalue)`` are treated as
    zero; the default rank_tol is order * machine epsilon. The zero matrix
    maps to the zero matrix.
    """
    M = check_symmetric(M)
    n = M.shape[0]
    if rank_tol is None:
        rank_tol = n * np.finfo(float).eps
    w, V = np.linalg.eigh(M)
    cutoff = rank_tol * max(float(w[-1]), 0.0)
    keep = w > max(cutoff, 0.0)
    if not np.any(keep):
        return np.zeros_like(M)
    Vk = V[:, keep]
    return (Vk / w[keep]) @ Vk.T


def _border_odd(S: np.ndarray) -> np.ndarray:
    """Even-order extension of an odd-order skew matrix.

    Appends one row/column equal to the first standard basis vector, the
    fixed convention this library uses for odd orders.
    """
    n = S.shape[0]
    B = np.zeros((n + 1, n + 1))
    B[:n, :n] = S
    B[0, n] = 1.0
    B[n, 0] = -1.0
    return B


def pfaffian_sign_logmag(S: np.ndarray, *, validate: bool = True) -> tuple[float, float]:
    """Pfaffian of a skew-symmetric matrix as (sign, log magnitude).

    Uses Householder tridiagonalization under orthogonal congruence, O(n^3)
    and stable; the log-magnitude form avoids overflow when Pfaffians of
    large or badly scaled matrices are only needed in ratios. Odd orders
    are bordered first (see _border_odd). A zero Pfaffian is returned as
    (0.0, -inf).
    """
    A = check_skew(S) if validate else np.array(S, dtype=float, copy=True)
    n = A.shape[0]
    if n == 0:
        return 1.0, 0.0
    if n % 2 == 1:
        A = _border_odd(A)
        n += 1
    sign = 1.0
    logmag = 0.0
    for k in range(n - 2):
        x = A[k + 1:, k]
        if not np.any(np.abs(x[1:]) > 0.0):
            continue
        v = x / np.max(np.abs(x))  # rescale so denormal columns cannot underflow
        alpha = np.linalg.norm(v)
        v[0] += alpha if v[0] >= 0.0 else -alpha
        v /= np.linalg.norm(v)
        # congruence by the reflector I - 2 v v^T on rows/cols k+1:
        A[k + 1:, k:] -= 2.0 * np.outer(v, v @ A[k + 1:, k:])
        A[:, k + 1:] -= 2.0 * np.outer(A[:, k + 1:] @ v, v)
        A[k + 1:, k + 1:] = 0.5 * (A[k + 1:, k + 1:] - A[k + 1:, k + 1:].T)
        sign = -sign  # each reflector has determinant -1
    for i in range(0, n - 1, 2):
        t = A[i, i + 1]
        if t == 0.0:
            return 0.0, -np.inf
        if t < 0.0:
            sign = -sign
        logmag += np.log(abs(t))
    return sign, logmag


def pfaffian(S: np.ndarray) -> float:
    """Pfaffian of a skew-symmetric matrix; Pf(S)^2 == det(S) for even order.

    Odd orders use the bordered-matrix convention of pfaffian_sign_logmag.
    """
    sign, logmag = pfaffian_sign_logmag(S)
    if sign == 0.0:
        return 0.0
    return sign * np.exp(logmag)


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Monotone nondecreasing in x with I_0 = 0 and I_1 = 1. Backed by the
    continued-fraction/series evaluation in scipy.special.betainc, which
    meets the ~1e-13 relative accuracy the Pfaffian entries require.
    """
    if not (a > 0.0 and b > 0.0):
        raise DomainError("reg_inc_beta requires a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise DomainError("reg_inc_beta requires x in [0, 1]")
    return float(special.betainc(a, b, x))


def reg_inc_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x).

    P(a, 0) = 0, increasing in x with limit 1.
    """
    if not a > 0.0:
        raise DomainError("reg_inc_gamma requires a > 0")
    if not x >= 0.0:
        raise DomainError("reg_inc_gamma requires x >= 0")
    return float(special.gammainc(a, x))
