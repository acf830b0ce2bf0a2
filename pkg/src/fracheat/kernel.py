"""Self-similar heat kernel profiles and the induced singular kernel.

The kernel of the fractional heat flow has the self-similar form
P(x,t) = t^{-N/sigma} Phi(x t^{-1/sigma}); applying the nonlocal operator
gives A(x,t) = t^{-1-N/sigma} Psi(x t^{-1/sigma}).  Phi is positive and
radially decreasing with an s^{-N-sigma} tail; Psi is bounded, changes
sign, and integrates to zero against the self-similar measure.  This
module builds sampled radial profiles for both, validates the decay
envelopes, and evaluates the zero-mean cancellation integral.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .geometry import SigmaParams, SpaceTimePoint, sphere_area
from . import radial_fourier as rf

FOURIER_CONVENTION = "fwd-no-prefactor-v1"

KIND_PHI = "phi"
KIND_PSI = "psi"


class ProfileError(RuntimeError):
    pass


def _default_s_max(sigma: float) -> float:
    # far enough out that value * s^{N+sigma} has settled to ~1% at s_max/2
    if sigma < 0.8:
        return 2.0e4
    if sigma < 1.2:
        return 80.0
    return 150.0


@dataclass
class KernelProfile:
    """Sampled radial profile with algebraic-tail continuation.

    Samples live on s[0] = 0 plus a log-spaced grid; interpolation is
    monotone cubic in log-radius, a quadratic even extension below the
    first positive sample, and tail_amplitude * s^{-N-sigma} beyond s_max.
    """

    params: SigmaParams
    kind: str
    s: np.ndarray
    values: np.ndarray
    tail_amplitude: float
    _interp: PchipInterpolator | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in (KIND_PHI, KIND_PSI):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.s[0] != 0.0 or self.s.size < 8:
            raise ValueError("profile needs s[0] = 0 and a usable radial grid")

    @property
    def s_max(self) -> float:
        return float(self.s[-1])

    @property
    def tail_exponent(self) -> float:
        return -(self.params.dim + self.params.sigma)

    def _interpolator(self) -> PchipInterpolator:
        if self._interp is None:
            self._interp = PchipInterpolator(np.log(self.s[1:]), self.values[1:], extrapolate=False)
        return self._interp

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        out = np.empty_like(s)
        s1 = self.s[1]
        core = s < s1
        tail = s > self.s_max
        mid = ~(core | tail)
        if core.any():
            # even extension: f(0) + (f(s1) - f(0)) (s/s1)^2
            f0, f1 = self.values[0], self.values[1]
            out[core] = f0 + (f1 - f0) * (s[core] / s1) ** 2
        if mid.any():
            out[mid] = self._interpolator()(np.log(s[mid]))
        if tail.any():
            out[tail] = self.tail_amplitude * s[tail] ** self.tail_exponent
        return out[0] if scalar else out

    def derivative(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        out = np.empty_like(s)
        s1 = self.s[1]
        core = s < s1
        tail = s > self.s_max
        mid = ~(core | tail)
        if core.any():
            f0, f1 = self.values[0], self.values[1]
            out[core] = 2.0 * (f1 - f0) * s[core] / s1**2
        if mid.any():
            # d/ds = (1/s) d/d(log s)
            out[mid] = self._interpolator().derivative()(np.log(s[mid])) / s[mid]
        if tail.any():
            out[tail] = (
                self.tail_amplitude * self.tail_exponent * s[tail] ** (self.tail_exponent - 1.0)
            )
        return out[0] if scalar else out


def _sample_grid(s_max: float, n_samples: int, s_min: float = 1e-4) -> np.ndarray:
    return np.concatenate(([0.0], np.geomspace(s_min, s_max, n_samples - 1)))


def _fit_tail_amplitude(s: np.ndarray, values: np.ndarray, exponent: float) -> float:
    return float(values[-1] * s[-1] ** (-exponent))


def build_phi_profile(
    p: SigmaParams, s_max: float | None = None, n_samples: int = 2048
) -> KernelProfile:
    """Sample the heat-kernel shape function by radial Fourier inversion.

    The symbol exp(-|xi|^sigma) is inverted with the Bessel-panel
    quadrature; total mass is unity by the Fourier convention and is
    verified separately by `total_mass`.
    """
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    if s_max is None:
        s_max = _default_s_max(p.sigma)
    if s_max <= 0:
        raise ValueError("s_max must be positive")
    grid = _sample_grid(s_max, n_samples)
    vals = np.array([rf.radial_symbol_inversion(p, float(s), 0.0) for s in grid])
    if np.any(vals <= 0.0):
        bad = grid[np.argmax(vals <= 0.0)]
        raise ProfileError(f"heat profile came out nonpositive near s = {bad:g}")
    if np.any(np.diff(vals) >= 0.0):
        bad = grid[1 + np.argmax(np.diff(vals) >= 0.0)]
        raise ProfileError(f"heat profile not strictly decreasing near s = {bad:g}")
    amp = _fit_tail_amplitude(grid, vals, -(p.dim + p.sigma))
    return KernelProfile(p, KIND_PHI, grid, vals, amp)


def build_psi_profile(phi: KernelProfile, n_samples: int | None = None) -> KernelProfile:
    """Profile of the singular kernel from the shape function and its slope.

    Uses the radial identity sigma * Psi = N * Phi + s * Phi'; the slope is
    evaluated by the exact Hankel-derivative quadrature rather than by
    differencing the sampled table, which cannot reach the required
    accuracy at practical sample counts.  Deep in the tail the identity
    multiplies the slope's quadrature noise by s, so samples switch to the
    direct inversion of |xi|^sigma exp(-|xi|^sigma) there; tests cross-check
    the two routes against each other at sampled points.
    """
    p = phi.params
    grid = phi.s if n_samples is None else _sample_grid(phi.s_max, n_samples)
    if n_samples is None:
        phi_vals = phi.values
    else:
        phi_vals = np.array([rf.radial_symbol_inversion(p, float(s), 0.0) for s in grid])
    # noise model: identity-route error ~ s * eps / sigma vs value ~ K s^{-N-sigma}
    eps_d = 5e-16
    s_switch = (1e-3 * p.sigma * abs(phi.tail_amplitude) / eps_d) ** (
        1.0 / (p.dim + p.sigma + 1.0)
    )
    vals = np.empty_like(grid)
    for i, s in enumerate(grid):
        if s <= s_switch:
            dphi = rf.radial_profile_derivative(p, float(s))
            vals[i] = (p.dim * phi_vals[i] + s * dphi) / p.sigma
        else:
            vals[i] = psi_direct_value(p, float(s))
    amp = _fit_tail_amplitude(grid, vals, -(p.dim + p.sigma))
    return KernelProfile(p, KIND_PSI, grid, vals, amp)


def psi_direct_value(p: SigmaParams, s: float) -> float:
    """Direct inversion of |xi|^sigma exp(-|xi|^sigma); cross-check route."""
    return rf.radial_symbol_inversion(p, s, p.sigma)


def total_mass(p: SigmaParams, S0: float | None = None) -> tuple[float, float]:
    """Mass of the heat kernel profile with Richardson-extrapolated tail.

    Plain truncation converges like S^-sigma and cannot reach 1e-8 for
    small sigma; extrapolation in the known tail powers fixes that.
    Returns (mass, error_estimate).
    """
    if S0 is None:
        S0 = min(10.0 ** (3.0 / p.sigma), 3.0e6)
        S0 = max(S0, 1e3)
    return rf.richardson_sigma_limit(lambda S: rf.partial_mass(p, S), S0, p.sigma)


# ---------------------------------------------------------------------------
# kernel evaluation


def _check_time(t) -> None:
    if np.any(np.asarray(t) <= 0):
        raise ValueError(f"kernel is defined for t > 0, got t = {t!r}")


def eval_P(Y: SpaceTimePoint, phi: KernelProfile) -> float:
    """Heat kernel value P(x, t) = t^{-N/sigma} Phi(|x| t^{-1/sigma})."""
    _check_time(Y.t)
    p = phi.params
    z = np.linalg.norm(Y.x) * Y.t ** (-1.0 / p.sigma)
    return float(Y.t ** (-p.dim / p.sigma) * phi(z))


def eval_A(Y: SpaceTimePoint, psi: KernelProfile) -> float:
    """Singular kernel value A(x, t) = t^{-1-N/sigma} Psi(|x| t^{-1/sigma})."""
    _check_time(Y.t)
    p = psi.params
    z = np.linalg.norm(Y.x) * Y.t ** (-1.0 / p.sigma)
    return float(Y.t ** (-1.0 - p.dim / p.sigma) * psi(z))


def eval_P_radial(r, t, phi: KernelProfile) -> np.ndarray:
    """Vectorized P over radial distances r at a single time t > 0."""
    _check_time(t)
    p = phi.params
    lam = t ** (-1.0 / p.sigma)
    return t ** (-p.dim / p.sigma) * phi(np.asarray(r, dtype=float) * lam)


def eval_A_radial(r, t, psi: KernelProfile) -> np.ndarray:
    _check_time(t)
    p = psi.params
    lam = t ** (-1.0 / p.sigma)
    return t ** (-1.0 - p.dim / p.sigma) * psi(np.asarray(r, dtype=float) * lam)


def time_derivative_A_radial(r, t, psi: KernelProfile) -> np.ndarray:
    """d/dt of A along the self-similar form; profile slope enters numerically."""
    _check_time(t)
    p = psi.params
    r = np.asarray(r, dtype=float)
    s = r * t ** (-1.0 / p.sigma)
    bracket = (1.0 + p.dim / p.sigma) * psi(s) + s * psi.derivative(s) / p.sigma
    return -(t ** (-2.0 - p.dim / p.sigma)) * bracket


def gradient_A_radial(r, t, psi: KernelProfile) -> np.ndarray:
    """|grad_x A|, radial by symmetry."""
    _check_time(t)
    p = psi.params
    r = np.asarray(r, dtype=float)
    s = r * t ** (-1.0 / p.sigma)
    return np.abs(t ** (-1.0 - (p.dim + 1.0) / p.sigma) * psi.derivative(s))


# ---------------------------------------------------------------------------
# decay envelopes


@dataclass
class DecayBoundsReport:
    sup_A: float
    sup_dtA: float
    sup_gradA: float
    drift: dict
    slopes: dict
    passed: bool
    witness: tuple | None = None


def _envelope_sups(psi: KernelProfile, n_shells: int, n_dirs: int) -> tuple[float, float, float]:
    p = psi.params
    shells = np.geomspace(1e-2, 1e2, n_shells)
    # the direction parameter is capped below the tail joint, where the
    # weighted time-derivative bracket is dominated by interpolation noise
    s_hi = min(1e3, psi.s_max / 2.0)
    svals = np.concatenate(([0.0], np.geomspace(1e-3, s_hi, n_dirs)))
    rho, s = np.meshgrid(shells, svals, indexing="ij")
    scale = np.sqrt(1.0 + s**2)
    t = (rho / scale) ** p.sigma
    r = s * rho / scale
    a = np.abs(eval_A_radial(r, t, psi))
    da = np.abs(time_derivative_A_radial(r, t, psi))
    ga = np.abs(gradient_A_radial(r, t, psi))
    sup_a = float(np.max(a * rho ** (p.dim + p.sigma)))
    sup_t = float(np.max(da * rho ** (p.dim + 2.0 * p.sigma)))
    sup_g = float(np.max(ga * rho ** (p.dim + p.sigma + 1.0)))
    return sup_a, sup_t, sup_g


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    mask = y > 0
    coef = np.polyfit(np.log(x[mask]), np.log(y[mask]), 1)
    return float(coef[0])


def verify_decay_bounds(
    psi: KernelProfile, n_shells: int = 24, n_dirs: int = 256, drift_tol: float = 0.05
) -> DecayBoundsReport:
    """Fit the envelope constants of the singular kernel and its derivatives.

    Reports sup |A| |Y|^{N+sigma} (and the two derivative analogues) over a
    sample set spanning |Y| in [1e-2, 1e2], the relative drift under sample
    refinement, and log-log decay slopes along coordinate axes.
    """
    p = psi.params
    coarse = _envelope_sups(psi, n_shells, n_dirs)
    fine = _envelope_sups(psi, 2 * n_shells, 2 * n_dirs)
    drift = {
        name: abs(f / c - 1.0) if c > 0 else np.inf
        for name, c, f in zip(("A", "dtA", "gradA"), coarse, fine)
    }
    # |A| and |dt A| along the time axis (x = 0): exact power laws of the norm
    t_axis = np.geomspace(1e-2, 1e2, 40) ** p.sigma
    norms = t_axis ** (1.0 / p.sigma)
    slope_a = _loglog_slope(norms, np.abs(eval_A_radial(0.0, t_axis, psi)))
    slope_dt = _loglog_slope(norms, np.abs(time_derivative_A_radial(0.0, t_axis, psi)))
    # |grad A| along the space axis at a small fixed time; the time is chosen
    # so the similarity variable sits deep enough in the tail that lower-order
    # corrections stay below the slope tolerance
    r_axis = np.geomspace(10.0, 100.0, 40)
    s_lo = (0.005 / p.sigma) ** (-1.0 / p.sigma)
    t0 = (r_axis[0] / s_lo) ** p.sigma
    g = gradient_A_radial(r_axis, t0, psi)
    norms_g = np.hypot(r_axis, t0 ** (1.0 / p.sigma))
    slope_g = _loglog_slope(norms_g, g)
    slopes = {"A": slope_a, "dtA": slope_dt, "gradA": slope_g}
    finite = all(np.isfinite(v) and v > 0 for v in fine)
    passed = finite and all(d < drift_tol for d in drift.values())
    witness = None
    if not finite:
        witness = ("nonfinite envelope", fine)
    return DecayBoundsReport(*fine, drift=drift, slopes=slopes, passed=passed, witness=witness)


# ---------------------------------------------------------------------------
# cancellation


def psi_moment(psi: KernelProfile, tail_tol: float = 1e-7) -> float:
    """int_0^inf s^{N-1} Psi(s) ds, extrapolated in the truncation radius.

    The integrand's positive core and heavy negative tail cancel exactly;
    truncation at S leaves an O(S^-sigma) remainder, removed by Richardson
    extrapolation in the tail powers.
    """
    p = psi.params
    S0 = max(min(10.0 ** (3.5 / p.sigma), 3.0e7), 1e3)
    val, err = rf.richardson_sigma_limit(
        lambda S: rf.radial_moment_partial(p, S, p.sigma), S0, p.sigma
    )
    if err > tail_tol:
        raise rf.QuadratureError(
            f"radial moment tail estimate {err:.2e} above tolerance {tail_tol:.1e}", s=S0
        )
    return val


def cancellation_integral(
    R: float, eps: float, psi: KernelProfile, half: str = "plus"
) -> float:
    """Integral of A over the half-annulus eps < |Y| < R, either time side.

    The self-similar change of variables splits it into log(R/eps) times a
    radial moment of Psi, which vanishes; the returned value certifies the
    cancellation law numerically.  Both time halves coincide because the
    kernel profile is even in the similarity variable.
    """
    if half not in ("plus", "minus"):
        raise ValueError(f"half must be 'plus' or 'minus', got {half!r}")
    if not 0.0 < eps < R:
        raise ValueError("need 0 < eps < R")
    p = psi.params
    moment = psi_moment(psi)
    return sphere_area(p.dim) * p.sigma * math.log(R / eps) * moment


# ---------------------------------------------------------------------------
# serialization / cache interface


def save_profile(profile: KernelProfile, csv_path: str | Path) -> Path:
    """CSV table (s, value) plus a JSON sidecar with parameters and the tail."""
    csv_path = Path(csv_path)
    data = np.column_stack([profile.s, profile.values])
    np.savetxt(csv_path, data, delimiter=",", header="s,value", comments="")
    sidecar = {
        "dim": profile.params.dim,
        "sigma": profile.params.sigma,
        "kind": profile.kind,
        "tail_amplitude": profile.tail_amplitude,
        "s_max": profile.s_max,
        "n_samples": int(profile.s.size),
        "convention": FOURIER_CONVENTION,
    }
    csv_path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    return csv_path


def load_profile(csv_path: str | Path) -> KernelProfile:
    csv_path = Path(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    if meta.get("convention") != FOURIER_CONVENTION:
        raise ProfileError(
            f"profile cached under convention {meta.get('convention')!r}; "
            f"this build uses {FOURIER_CONVENTION!r}"
        )
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    return KernelProfile(
        SigmaParams(meta["dim"], meta["sigma"]),
        meta["kind"],
        data[:, 0],
        data[:, 1],
        meta["tail_amplitude"],
    )
