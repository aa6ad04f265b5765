"""Doubly singular beta ensemble: construction and eigenvalue extraction.

Given A ~ W_p(m, Sigma) and B ~ W_p(q, Sigma) with p > max(m, q), the
ensemble's roots are the nonzero generalized eigenvalues of B e = lambda A e,
equivalently the nonzero spectrum of B A^+. Two routes are implemented:

* the reduced route, eig{ V^T (C L C)^{-1} V } with V = C H^T Z_B and
  C = (H^T Sigma H)^{-1/2}, which touches nothing bigger than p x m;
* the direct route, which materializes A and B and restricts B A^+ to the
  range of A -- a deliberately independent computation used to cross-check
  the reduced one on small p.

Plus seeded Monte Carlo campaigns producing empirical CDFs.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .matrix_core import RankDeficient, sym_eigen_rank
from .sampling import RngStream, ScaleMatrix, sample_normal_matrix

__all__ = [
    "EnsembleParams",
    "GeneralizedEigenSolution",
    "EmpiricalCdf",
    "largest_root_reduced",
    "reduced_spectrum",
    "largest_root_direct",
    "simulate_empirical_cdf",
    "ks_distance",
]

MAX_RESAMPLE_ATTEMPTS = 3


@dataclass(frozen=True)
class EnsembleParams:
    """The triple (p, m, q): ambient dimension and the two Wishart dofs."""

    p: int
    m: int
    q: int

    def __post_init__(self):
        if min(self.p, self.m, self.q) < 1:
            raise ValueError("p, m, q must be positive")
        if self.p <= max(self.m, self.q):
            raise ValueError(
                f"doubly singular regime requires p > max(m, q); "
                f"got p={self.p}, m={self.m}, q={self.q}"
            )

    @property
    def n_roots(self) -> int:
        return min(self.m, self.q)


@dataclass(frozen=True, eq=False)
class GeneralizedEigenSolution:
    """Nonzero roots of B e = lambda A e, descending; transform on request.

    When present, ``transform`` T (p x m) satisfies T^T A T = I_m and
    T^T B T = diag(roots padded with zeros).
    """

    roots: np.ndarray
    transform: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    """Right-continuous step CDF of a sorted sample."""

    sorted_samples: np.ndarray
    n_sims: int
    n_resampled: int = 0

    def evaluate(self, x) -> np.ndarray:
        idx = np.searchsorted(self.sorted_samples, np.asarray(x, dtype=float), side="right")
        return idx / self.n_sims

    def to_csv(self, path) -> None:
        """Write columns x,F with 17-significant-digit decimals."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x,F\n")
            for i, x in enumerate(self.sorted_samples):
                fh.write(f"{x:.17g},{(i + 1) / self.n_sims:.17g}\n")


def _draw_factors(gen: np.random.Generator, params: EnsembleParams, scale: ScaleMatrix):
    Z_A = sample_normal_matrix(gen, params.p, params.m, scale)
    Z_B = sample_normal_matrix(gen, params.p, params.q, scale)
    return Z_A, Z_B


def reduced_spectrum_from_factors(
    Z_A: np.ndarray, Z_B: np.ndarray, scale: ScaleMatrix
) -> np.ndarray:
    """All min(m, q) nonzero roots via the reduced route, descending."""
    m = Z_A.shape[1]
    q = Z_B.shape[1]
    H, L = sym_eigen_rank(Z_A)
    if scale.is_identity():
        V = H.T @ Z_B
        M = V.T @ (V / L[:, None])
    else:
        S = scale.congruence(H)
        sw, sv = np.linalg.eigh(0.5 * (S + S.T))
        if sw[0] <= 0.0:
            raise RankDeficient("H^T Sigma H lost positive definiteness")
        C = (sv / np.sqrt(sw)) @ sv.T
        V = C @ (H.T @ Z_B)
        CLC = C @ (L[:, None] * C)
        M = V.T @ cho_solve(cho_factor(0.5 * (CLC + CLC.T), lower=True), V)
    M = 0.5 * (M + M.T)
    roots = np.linalg.eigvalsh(M)[::-1]
    return np.maximum(roots[: min(m, q)], 0.0)


def direct_spectrum_from_factors(Z_A: np.ndarray, Z_B: np.ndarray):
    """Nonzero roots (descending) and the A-eigensystem via dense p x p work."""
    p, m = Z_A.shape
    q = Z_B.shape[1]
    A = Z_A @ Z_A.T
    B = Z_B @ Z_B.T
    w, V = np.linalg.eigh(A)
    w = w[::-1][:m].copy()
    Hd = V[:, ::-1][:, :m]
    rank_floor = (p * 1e-12) ** 2 * max(w[0], 0.0)
    if w[-1] <= rank_floor or w[-1] <= 0.0:
        raise RankDeficient("A is numerically rank deficient")
    # B A^+ restricted to range(A): similar to L^{-1/2} H^T B H L^{-1/2}
    inv_sqrt = 1.0 / np.sqrt(w)
    M = (Hd.T @ B @ Hd) * np.outer(inv_sqrt, inv_sqrt)
    M = 0.5 * (M + M.T)
    roots_all = np.linalg.eigvalsh(M)[::-1]
    roots = np.maximum(roots_all[: min(m, q)], 0.0)
    return roots, roots_all, Hd, w


def largest_root_reduced(rng, params: EnsembleParams, scale: ScaleMatrix) -> float:
    """One draw of the largest root; O(p * m^2) time, no p x p matrix."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    Z_A, Z_B = _draw_factors(gen, params, scale)
    return float(reduced_spectrum_from_factors(Z_A, Z_B, scale)[0])


def reduced_spectrum(rng, params: EnsembleParams, scale: ScaleMatrix) -> np.ndarray:
    """One draw of the full nonzero spectrum via the reduced route."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    Z_A, Z_B = _draw_factors(gen, params, scale)
    return reduced_spectrum_from_factors(Z_A, Z_B, scale)


def largest_root_direct(
    rng, params: EnsembleParams, scale: ScaleMatrix, with_transform: bool = False
) -> GeneralizedEigenSolution:
    """One draw solved by materializing A and B; intended for p up to ~500.

    With ``with_transform`` the p x m transform T = T1 T2 is returned, where
    T1 = H L^{-1/2} maps A to I_m and T2 diagonalizes T1^T B T1.
    """
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    Z_A, Z_B = _draw_factors(gen, params, scale)
    roots, roots_all, Hd, w = direct_spectrum_from_factors(Z_A, Z_B)
    transform = None
    if with_transform:
        T1 = Hd / np.sqrt(w)
        inner = T1.T @ (Z_B @ (Z_B.T @ T1))
        ew, T2 = np.linalg.eigh(0.5 * (inner + inner.T))
        transform = T1 @ T2[:, ::-1]
    return GeneralizedEigenSolution(roots=roots, transform=transform)


# -- Monte Carlo campaigns -------------------------------------------------


def _replicate_value(seed: int, index: int, n_sims: int, params, scale) -> tuple[float, int]:
    """Largest root for replicate ``index``; retries on degenerate draws.

    Attempt k of replicate i uses stream i + k * n_sims, so the resample
    policy is deterministic and independent of scheduling.
    """
    for attempt in range(MAX_RESAMPLE_ATTEMPTS + 1):
        stream = RngStream(seed=seed, stream_id=index + attempt * n_sims)
        try:
            return largest_root_reduced(stream, params, scale), attempt
        except RankDeficient:
            continue
    raise RankDeficient(
        f"replicate {index} stayed rank deficient after "
        f"{MAX_RESAMPLE_ATTEMPTS} resampling attempts"
    )


def _replicate_block(args) -> tuple[np.ndarray, int]:
    seed, start, stop, n_sims, params, scale = args
    vals = np.empty(stop - start)
    resampled = 0
    for i in range(start, stop):
        vals[i - start], attempts = _replicate_value(seed, i, n_sims, params, scale)
        resampled += attempts
    return vals, resampled


def simulate_empirical_cdf(
    seed: int,
    params: EnsembleParams,
    scale: ScaleMatrix,
    n_sims: int,
    workers: int = 1,
) -> EmpiricalCdf:
    """n_sims independent largest-root replicates, sorted into a step CDF.

    One RngStream per replicate keyed by (seed, replicate index): output is
    identical for any worker count.
    """
    if n_sims < 1:
        raise ValueError("n_sims must be positive")
    if workers <= 1 or n_sims < 32:
        vals, resampled = _replicate_block((seed, 0, n_sims, n_sims, params, scale))
    else:
        bounds = np.linspace(0, n_sims, workers + 1, dtype=int)
        jobs = [
            (seed, int(a), int(b), n_sims, params, scale)
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_replicate_block, jobs))
        vals = np.concatenate([v for v, _ in parts])
        resampled = sum(r for _, r in parts)
    vals.sort()
    return EmpiricalCdf(sorted_samples=vals, n_sims=n_sims, n_resampled=resampled)


def ks_distance(empirical: EmpiricalCdf, cdf) -> float:
    """Kolmogorov-Smirnov distance between a step CDF and a continuous one.

    ``cdf`` is a callable evaluated at every sample point (vectorized
    callables are used as such).
    """
    x = empirical.sorted_samples
    try:
        F = np.asarray(cdf(x), dtype=float)
        if F.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        F = np.array([cdf(v) for v in x], dtype=float)
    n = empirical.n_sims
    steps = np.arange(n)
    return float(
        max(np.max(np.abs(F - steps / n)), np.max(np.abs(F - (steps + 1) / n)))
    )
