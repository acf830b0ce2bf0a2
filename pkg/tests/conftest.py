import numpy as np
import pytest

from fracheat.geometry import SigmaParams
from fracheat import kernel


_PROFILE_CACHE: dict = {}


@pytest.fixture(scope="session")
def profiles():
    """Session-wide profile builder; (dim, sigma, fine) -> (phi, psi)."""

    def get(dim: int, sigma: float, fine: bool = False):
        key = (dim, sigma, fine)
        if key not in _PROFILE_CACHE:
            p = SigmaParams(dim, sigma)
            n = 2048 if fine else 512
            phi = kernel.build_phi_profile(p, n_samples=n)
            psi = kernel.build_psi_profile(phi)
            _PROFILE_CACHE[key] = (phi, psi)
        return _PROFILE_CACHE[key]

    return get


SIGMA_DIM_MATRIX = [(0.5, 1), (0.5, 2), (1.0, 1), (1.0, 2), (1.5, 1), (1.5, 2)]


@pytest.fixture(scope="session")
def sigma_dim_matrix():
    return SIGMA_DIM_MATRIX


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
