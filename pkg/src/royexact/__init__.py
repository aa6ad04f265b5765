"""Largest-root distributions for doubly singular beta ensembles.

Exact CDFs (Pfaffian-based double Wishart and single Wishart largest-root
laws), large-p asymptotics with and without scale correction, a
Tracy-Widom fast approximation, and seeded Monte Carlo simulation of the
ensemble itself for validation.
"""

__version__ = "0.1.0"

from .beta_ensemble import (
    EmpiricalCdf,
    EnsembleParams,
    GeneralizedEigenSolution,
    ks_distance,
    largest_root_direct,
    largest_root_reduced,
    reduced_spectrum,
    simulate_empirical_cdf,
)
from .exact_dist import (
    CdfCurve,
    ConditioningWarning,
    DoubleWishartParams,
    RegimeWarning,
    UnsupportedParams,
    cdf_curve,
    double_wishart_max_cdf,
    invert_cdf,
    mardia_dual,
    p_value,
    theorem1_cdf,
    theorem3_cdf,
    tw1_cdf,
    tw_cdf,
    wishart_max_cdf,
)
from .matrix_core import (
    DomainError,
    EigenFactorization,
    RankDeficient,
    pfaffian,
    pseudoinverse,
    reg_inc_beta,
    reg_inc_gamma,
    sym_eigen_rank,
)
from .sampling import (
    NotPositiveDefinite,
    RngStream,
    ScaleMatrix,
    WishartSample,
    load_scale_csv,
    sample_normal_matrix,
    sample_random_scale,
    sample_wishart,
)
from .scale_correction import (
    DegenerateDof,
    ScaleStats,
    estimate_scale_moments,
    scale_moments_exact,
    theorem2_cdf,
)

__all__ = [
    "__version__",
    "CdfCurve",
    "ConditioningWarning",
    "DegenerateDof",
    "DomainError",
    "DoubleWishartParams",
    "EigenFactorization",
    "EmpiricalCdf",
    "EnsembleParams",
    "GeneralizedEigenSolution",
    "NotPositiveDefinite",
    "RankDeficient",
    "RegimeWarning",
    "RngStream",
    "ScaleMatrix",
    "ScaleStats",
    "UnsupportedParams",
    "WishartSample",
    "cdf_curve",
    "double_wishart_max_cdf",
    "estimate_scale_moments",
    "invert_cdf",
    "ks_distance",
    "largest_root_direct",
    "largest_root_reduced",
    "load_scale_csv",
    "mardia_dual",
    "p_value",
    "pfaffian",
    "pseudoinverse",
    "reduced_spectrum",
    "reg_inc_beta",
    "reg_inc_gamma",
    "sample_normal_matrix",
    "sample_random_scale",
    "sample_wishart",
    "scale_moments_exact",
    "simulate_empirical_cdf",
    "sym_eigen_rank",
    "theorem1_cdf",
    "theorem2_cdf",
    "theorem3_cdf",
    "tw1_cdf",
    "tw_cdf",
    "wishart_max_cdf",
]
