"""Seeded sampling of normal matrices, (singular) Wishart factors, and
random scale matrices.

Reproducibility contract: every draw is keyed by an RngStream value
(seed, stream_id). Streams are independent Philox instances, so a campaign
that assigns one stream per replicate produces bit-identical output for a
fixed seed regardless of how replicates are scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NotPositiveDefinite",
    "RngStream",
    "ScaleMatrix",
    "WishartSample",
    "sample_normal_matrix",
    "sample_wishart",
    "sample_random_scale",
    "load_scale_csv",
]


class NotPositiveDefinite(ValueError):
    """A dense scale matrix has no Cholesky factorization."""


@dataclass(frozen=True)
class RngStream:
    """Value object naming one reproducible random stream."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


@dataclass(frozen=True, eq=False)
class ScaleMatrix:
    """The p x p Wishart scale Sigma in identity, diagonal, or dense form.

    Construct through the identity/diagonal/dense classmethods; the dense
    constructor insists on symmetry and positive definiteness (a Cholesky
    factorization must succeed).
    """

    kind: str
    order: int
    diag: np.ndarray | None = None
    entries: np.ndarray | None = None
    _chol: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def identity(cls, p: int) -> "ScaleMatrix":
        if p < 1:
            raise ValueError("order must be positive")
        return cls(kind="identity", order=p)

    @classmethod
    def diagonal(cls, values) -> "ScaleMatrix":
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("diagonal values must be a nonempty 1-d array")
        if np.any(v <= 0.0):
            raise NotPositiveDefinite("diagonal scale entries must be strictly positive")
        return cls(kind="diagonal", order=v.size, diag=v)

    @classmethod
    def dense(cls, entries) -> "ScaleMatrix":
        E = np.asarray(entries, dtype=float)
        if E.ndim != 2 or E.shape[0] != E.shape[1]:
            raise ValueError("dense scale must be square")
        scale = max(1.0, float(np.max(np.abs(E))))
        if np.max(np.abs(E - E.T)) > 1e-12 * scale:
            raise NotPositiveDefinite("dense scale must be symmetric")
        E = 0.5 * (E + E.T)
        try:
            C = np.linalg.cholesky(E)
        except np.linalg.LinAlgError as err:
            raise NotPositiveDefinite("dense scale is not positive definite") from err
        return cls(kind="dense", order=E.shape[0], entries=E, _chol=C)

    # -- linear-algebra helpers -------------------------------------------

    def apply_factor(self, G: np.ndarray) -> np.ndarray:
        """F @ G for the factor F with Sigma = F F^T."""
        if self.kind == "identity":
            return G
        if self.kind == "diagonal":
            return np.sqrt(self.diag)[:, None] * G
        return self._chol @ G

    def congruence(self, H: np.ndarray) -> np.ndarray:
        """H^T Sigma H without forming Sigma when avoidable."""
        if self.kind == "identity":
            return np.eye(H.shape[1])
        if self.kind == "diagonal":
            return H.T @ (self.diag[:, None] * H)
        return H.T @ (self.entries @ H)

    def trace(self) -> float:
        if self.kind == "identity":
            return float(self.order)
        if self.kind == "diagonal":
            return float(np.sum(self.diag))
        return float(np.trace(self.entries))

    def trace_square(self) -> float:
        """tr(Sigma^2)."""
        if self.kind == "identity":
            return float(self.order)
        if self.kind == "diagonal":
            return float(np.sum(self.diag**2))
        return float(np.sum(self.entries**2))

    def to_dense(self) -> np.ndarray:
        if self.kind == "identity":
            return np.eye(self.order)
        if self.kind == "diagonal":
            return np.diag(self.diag)
        return self.entries.copy()

    def is_identity(self) -> bool:
        return self.kind == "identity"


@dataclass(frozen=True, eq=False)
class WishartSample:
    """A Wishart draw kept in factor form: the matrix is factor @ factor.T.

    Never materializes the p x p product, so large-p campaigns stay
    O(p * dof) in memory.
    """

    factor: np.ndarray
    dof: int
    scale: ScaleMatrix


def sample_normal_matrix(rng, p: int, n: int, scale: ScaleMatrix) -> np.ndarray:
    """p x n matrix whose columns are independent N_p(0, Sigma) draws."""
    if p < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    if scale.order != p:
        raise ValueError(f"scale order {scale.order} does not match p={p}")
    g = _as_generator(rng)
    return scale.apply_factor(g.standard_normal((p, n)))


def sample_wishart(rng, p: int, dof: int, scale: ScaleMatrix) -> WishartSample:
    """W_p(dof, Sigma) draw in factor form; dof < p (singular) is allowed."""
    Z = sample_normal_matrix(rng, p, dof, scale)
    return WishartSample(factor=Z, dof=dof, scale=scale)


def sample_random_scale(rng, p: int, spec: str = "diag-uniform") -> ScaleMatrix:
    """Draw a random scale matrix according to a law descriptor.

    Descriptors (parameters optional, colon-separated):
      identity               -- the identity matrix
      diag-uniform[:lo,hi]   -- iid diagonal entries, uniform on [lo, hi]
                                (default [0.5, 2.0])
      diag-lognormal[:sigma] -- iid diagonal entries, exp(N(0, sigma^2))
                                (default sigma = 0.5)
      dense-ar1[:rho]        -- D^(1/2) R D^(1/2) with R_ij = rho^|i-j| and
                                uniform [0.5, 2.0] diagonal D (default 0.5)

    The diag-uniform default is a stand-in: generation laws for "random
    scale matrix" experiments are a modelling choice, not something this
    library can pin down, so alternatives are provided.
    """
    name, _, argstr = spec.partition(":")
    args = [float(v) for v in argstr.split(",") if v] if argstr else []
    g = _as_generator(rng)
    if name == "identity":
        return ScaleMatrix.identity(p)
    if name == "diag-uniform":
        lo, hi = args if args else (0.5, 2.0)
        if not (0.0 < lo <= hi):
            raise ValueError("diag-uniform needs 0 < lo <= hi")
        return ScaleMatrix.diagonal(g.uniform(lo, hi, size=p))
    if name == "diag-lognormal":
        sigma = args[0] if args else 0.5
        return ScaleMatrix.diagonal(np.exp(g.normal(0.0, sigma, size=p)))
    if name == "dense-ar1":
        rho = args[0] if args else 0.5
        if not 0.0 <= rho < 1.0:
            raise ValueError("dense-ar1 needs 0 <= rho < 1")
        d = g.uniform(0.5, 2.0, size=p)
        R = rho ** np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
        sd = np.sqrt(d)
        return ScaleMatrix.dense(sd[:, None] * R * sd[None, :])
    raise ValueError(f"unknown scale law {spec!r}")


def load_scale_csv(path) -> ScaleMatrix:
    """Read a user-supplied Sigma: p rows of p comma-separated values, no header."""
    E = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    return ScaleMatrix.dense(E)
