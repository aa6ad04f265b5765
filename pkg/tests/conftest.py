"""Shared campaign cache so acceptance criteria reuse identical simulations."""

import numpy as np
import pytest

from royexact.beta_ensemble import EnsembleParams, simulate_empirical_cdf
from royexact.sampling import RngStream, ScaleMatrix, sample_random_scale

_CAMPAIGNS: dict = {}

BASE_SEED = 20260809


def child_seed(*key: int) -> int:
    return int(np.random.SeedSequence(entropy=BASE_SEED, spawn_key=key).generate_state(1)[0])


def build_scale(p: int, desc) -> ScaleMatrix:
    """Scale matrix from a hashable descriptor: 'identity' or ('law', stream_id)."""
    if desc == "identity":
        return ScaleMatrix.identity(p)
    law, stream_id = desc
    return sample_random_scale(RngStream(BASE_SEED, stream_id), p, law)


def campaign(seed: int, p: int, m: int, q: int, scale_desc, n_sims: int):
    """Cached simulation campaign; returns (EmpiricalCdf, ScaleMatrix)."""
    key = (seed, p, m, q, scale_desc, n_sims)
    if key not in _CAMPAIGNS:
        scale = build_scale(p, scale_desc)
        emp = simulate_empirical_cdf(seed, EnsembleParams(p, m, q), scale, n_sims)
        _CAMPAIGNS[key] = (emp, scale)
    return _CAMPAIGNS[key]


@pytest.fixture(scope="session")
def base_seed():
    return BASE_SEED
