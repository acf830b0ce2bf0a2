"""Space-time geometry of the anisotropic scaling group (x, t) -> (lam*x, lam^sigma*t).

The natural "distance" |Y| = (|x|^2 + |t|^{2/sigma})^{1/2} on R^{N+1} is a
genuine metric only for sigma >= 1; below that it satisfies a relaxed
triangle inequality with an explicit constant.  Everything downstream
(kernel estimates, Holder seminorms) is measured in this quasimetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gamma as _gamma


@dataclass(frozen=True)
class SigmaParams:
    """Spatial dimension and fractional order of the diffusion operator."""

    dim: int
    sigma: float

    def __post_init__(self) -> None:
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if not 0.0 < float(self.sigma) < 2.0:
            raise ValueError(f"sigma must lie in (0, 2), got {self.sigma!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def nu(self) -> float:
        """Regularity ceiling min(1, sigma); derived, never stored."""
        return min(1.0, self.sigma)


@dataclass(frozen=True, eq=False)
class SpaceTimePoint:
    """A point Y = (x, t); t may be negative in kernel-difference geometry."""

    x: np.ndarray
    t: float

    @classmethod
    def of(cls, x, t: float) -> "SpaceTimePoint":
        return cls(np.atleast_1d(np.asarray(x, dtype=float)), float(t))

    def __sub__(self, other: "SpaceTimePoint") -> "SpaceTimePoint":
        return SpaceTimePoint(self.x - other.x, self.t - other.t)


def unit_ball_volume(dim: int) -> float:
    """Lebesgue measure of the Euclidean unit ball in R^dim."""
    return math.pi ** (dim / 2.0) / _gamma(dim / 2.0 + 1.0)


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim (= dim * omega_dim)."""
    return dim * unit_ball_volume(dim)


def sigma_norm(Y: SpaceTimePoint, p: SigmaParams) -> float:
    """Anisotropic norm (|x|^2 + |t|^{2/sigma})^{1/2}."""
    if Y.x.shape != (p.dim,):
        raise ValueError(f"point has {Y.x.shape[0]} spatial components, expected {p.dim}")
    return float(np.hypot(np.linalg.norm(Y.x), abs(Y.t) ** (1.0 / p.sigma)))


def sigma_norm_split(space_dist, time_dist, sigma: float):
    """Vectorized norm from spatial and temporal separations.

    Accepts arrays; used by the pair samplers in the regularity analyzers.
    """
    space_dist = np.asarray(space_dist, dtype=float)
    time_dist = np.asarray(time_dist, dtype=float)
    return np.hypot(space_dist, np.abs(time_dist) ** (1.0 / sigma))


def quasi_triangle_constant(p: SigmaParams) -> float:
    """Constant in the relaxed triangle inequality; equals 1 for sigma >= 1."""
    return 2.0 ** (max(0.0, 1.0 - p.sigma) / p.sigma)


@lru_cache(maxsize=None)
def _shape_integral(dim: int, sigma: float) -> float:
    # int_0^inf s^{dim-1} (1+s^2)^{-(dim+sigma)/2} ds, the angular factor of the
    # self-similar change of variables. Adaptive quadrature; a Beta-function
    # closed form exists and is used as an oracle in the tests.
    val, _ = integrate.quad(
        lambda s: s ** (dim - 1) * (1.0 + s * s) ** (-(dim + sigma) / 2.0),
        0.0,
        np.inf,
        epsabs=0.0,
        epsrel=1e-12,
        limit=300,
    )
    return val


def ball_measure(R: float, p: SigmaParams) -> float:
    """Lebesgue measure in R^{dim+1} of the anisotropic ball {|Y| < R}.

    Reduces to a one-dimensional radial integral; scales exactly like
    R^(dim+sigma).
    """
    if R <= 0:
        raise ValueError("R must be positive")
    d, s = p.dim, p.sigma
    return (
        2.0 * s * sphere_area(d) * _shape_integral(d, s) * R ** (d + s) / (d + s)
    )


def metric_comparison_constant(
    p: SigmaParams, n_samples: int = 100_000, seed: int = 0
) -> float:
    """Fitted constant c with |Y| <= c |Y|_sigma^nu on the Euclidean unit ball.

    The constant is generic in the theory; here it is estimated empirically as
    the max ratio over uniform samples (deterministic under fixed seed).
    """
    rng = np.random.default_rng(seed)
    d = p.dim + 1
    g = rng.standard_normal((n_samples, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radii = rng.random(n_samples) ** (1.0 / d)
    pts = g * radii[:, None]
    eucl = np.linalg.norm(pts, axis=1)
    snorm = sigma_norm_split(np.linalg.norm(pts[:, :-1], axis=1), pts[:, -1], p.sigma)
    mask = eucl > 0
    return float(np.max(eucl[mask] / snorm[mask] ** p.nu))
