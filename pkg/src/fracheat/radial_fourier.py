"""Oscillatory radial Fourier inversion for stretched-exponential symbols.

Every profile quantity in this package reduces to integrals of the form

    I(s) = int_0^inf exp(-r^sigma) r^a J_nu(r*s) dr,

with heavy algebraic tails after cancellation.  They are evaluated by
adaptive quadrature on the non-oscillatory head, fixed Gauss-Legendre
panels between consecutive Bessel zeros, and Euler acceleration of the
alternating panel series.  Partial masses and radial moments use the same
machinery after exchanging the order of integration, which turns slowly
convergent tail integrals into a single Bessel integral of higher order;
limits in the truncation radius are then taken by Richardson
extrapolation in the known tail powers S^(-k*sigma).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import jv, jvp

from .geometry import SigmaParams, sphere_area

# Envelope floor: beyond r with exp(-r^sigma) < _TINY panels are negligible.
_TINY = 1e-20
_GL_ORDER = 16
_TAIL_PANELS = 48
_BATCH = 512


class QuadratureError(RuntimeError):
    """Oscillatory integral did not settle; carries the offending argument."""

    def __init__(self, message: str, s: float | None = None):
        super().__init__(message)
        self.s = s


@lru_cache(maxsize=8)
def _gl_nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w  # mapped to [0, 1]


@lru_cache(maxsize=64)
def _zero_cache(nu: float) -> dict:
    return {"zeros": np.empty(0)}


def bessel_zeros(nu: float, count: int) -> np.ndarray:
    """First `count` positive zeros of J_nu, McMahon estimate + Newton."""
    cache = _zero_cache(nu)
    have = cache["zeros"].size
    if have >= count:
        return cache["zeros"][:count]
    k = np.arange(1, count + 1, dtype=float)
    x = (k + nu / 2.0 - 0.25) * math.pi
    mu = 4.0 * nu * nu
    # one McMahon correction term, then Newton
    x = x - (mu - 1.0) / (8.0 * x)
    for _ in range(3):
        f = jv(nu, x)
        df = jvp(nu, x)
        step = np.where(np.abs(df) > 0, f / np.where(df == 0, 1.0, df), 0.0)
        x = x - step
    cache["zeros"] = x
    return x


def euler_sum(terms: np.ndarray) -> tuple[float, float]:
    """Sum an alternating series by repeated averaging of partial sums."""
    s = np.cumsum(np.asarray(terms, dtype=float))
    prev = s[-1]
    while s.size > 1:
        s = 0.5 * (s[:-1] + s[1:])
        prev = s[-1]
    return float(s[0]), float(abs(s[0] - prev))


def _integrand(r: np.ndarray, sigma: float, a: float, nu: float, s: float) -> np.ndarray:
    return np.exp(-(r ** sigma)) * r ** a * jv(nu, r * s)


def exp_bessel_integral(
    sigma: float,
    a: float,
    nu: float,
    s: float,
    max_panels: int = 400_000,
) -> float:
    """int_0^inf exp(-r^sigma) r^a J_nu(r s) dr for s > 0.

    Direct adaptive quadrature when fewer than one oscillation fits under
    the envelope; otherwise panel sums between Bessel zeros with Euler
    acceleration once the panel magnitudes decay.
    """
    if s <= 0:
        raise ValueError("s must be positive; handle s = 0 in the caller")
    r_eff = (-math.log(_TINY)) ** (1.0 / sigma)

    def f(r):
        return _integrand(np.asarray(r, dtype=float), sigma, a, nu, s)

    z1 = bessel_zeros(nu, 1)[0] / s
    if z1 >= r_eff:
        val, _ = integrate.quad(
            lambda r: float(f(r)), 0.0, r_eff, limit=200, epsabs=1e-300, epsrel=1e-12
        )
        return val

    head, _ = integrate.quad(
        lambda r: float(f(r)), 0.0, z1, limit=200, epsabs=1e-300, epsrel=1e-12
    )

    gx, gw = _gl_nodes(_GL_ORDER)
    total = head
    panel_tail: list[float] = []  # magnitudes-decreasing run, Euler candidates
    decreasing = 0
    prev_mag = np.inf
    k0 = 1
    while True:
        if k0 > max_panels:
            raise QuadratureError(
                f"Bessel panel series did not settle after {k0} panels", s=s
            )
        zs = bessel_zeros(nu, k0 + _BATCH)[k0 - 1 : k0 + _BATCH] / s
        lo, hi = zs[:-1], zs[1:]
        widths = hi - lo
        nodes = lo[:, None] + widths[:, None] * gx[None, :]
        vals = _integrand(nodes, sigma, a, nu, s)
        panels = (vals * gw[None, :]).sum(axis=1) * widths

        for pv, redge in zip(panels, hi):
            mag = abs(pv)
            if panel_tail:
                panel_tail.append(pv)
            else:
                if mag <= prev_mag:
                    decreasing += 1
                else:
                    decreasing = 0
                prev_mag = mag
                if decreasing >= 4:
                    panel_tail.append(pv)
                else:
                    total += pv
            if len(panel_tail) >= _TAIL_PANELS:
                val, _ = euler_sum(np.array(panel_tail))
                return total + val
            if redge > r_eff:
                # envelope underflow: remaining panels are negligible
                if panel_tail:
                    val, _ = euler_sum(np.array(panel_tail))
                    total += val
                return total
        k0 += _BATCH


def _axis_value(p: SigmaParams, extra_power: float) -> float:
    # value at s = 0 of the radial inversion with symbol r^extra_power e^{-r^sigma}
    d = p.dim
    val, _ = integrate.quad(
        lambda r: math.exp(-(r ** p.sigma)) * r ** (extra_power + d - 1),
        0.0,
        np.inf,
        limit=300,
    )
    return (2.0 * math.pi) ** (-d) * sphere_area(d) * val


def radial_symbol_inversion(p: SigmaParams, s: float, symbol_power: float) -> float:
    """Radial profile of F^{-1}[ |xi|^symbol_power * exp(-|xi|^sigma) ] at radius s.

    Convention: forward transform exp(-i xi.x) with no prefactor, inverse
    carries (2 pi)^(-dim); the heat symbol then integrates to exactly one.
    """
    d = p.dim
    if s < 0:
        raise ValueError("radius must be nonnegative")
    if s == 0.0:
        return _axis_value(p, symbol_power)
    pref = (2.0 * math.pi) ** (-d / 2.0) * s ** (1.0 - d / 2.0)
    return pref * exp_bessel_integral(p.sigma, symbol_power + d / 2.0, d / 2.0 - 1.0, s)


def radial_profile_derivative(p: SigmaParams, s: float, symbol_power: float = 0.0) -> float:
    """d/ds of the radial inversion above (zero at s = 0 by evenness)."""
    d = p.dim
    if s == 0.0:
        return 0.0
    pref = (2.0 * math.pi) ** (-d / 2.0) * s ** (1.0 - d / 2.0)
    return -pref * exp_bessel_integral(p.sigma, symbol_power + d / 2.0 + 1.0, d / 2.0, s)


def partial_mass(p: SigmaParams, S: float, symbol_power: float = 0.0) -> float:
    """Integral over the ball |z| <= S of the radial inversion, by Fubini.

    Exchanging the order of integration collapses the heavy-tailed radial
    integral into a single Bessel integral of order dim/2, which the panel
    machinery handles for arbitrarily large S.
    """
    d = p.dim
    pref = sphere_area(d) * (2.0 * math.pi) ** (-d / 2.0) * S ** (d / 2.0)
    return pref * exp_bessel_integral(p.sigma, symbol_power + d / 2.0 - 1.0, d / 2.0, S)


def radial_moment_partial(p: SigmaParams, S: float, symbol_power: float) -> float:
    """int_0^S s^{dim-1} * profile(s) ds for the given symbol power."""
    d = p.dim
    pref = (2.0 * math.pi) ** (-d / 2.0) * S ** (d / 2.0)
    return pref * exp_bessel_integral(p.sigma, symbol_power + d / 2.0 - 1.0, d / 2.0, S)


def richardson_sigma_limit(fn, S0: float, sigma: float) -> tuple[float, float]:
    """Limit of fn(S) as S -> inf assuming fn = L + a S^-sigma + b S^-2sigma + ...

    Three-point Richardson extrapolation at S0, 2 S0, 4 S0.  Returns the
    extrapolated limit and a conservative error estimate (difference from
    the two-point extrapolation).
    """
    v = np.array([fn(S0), fn(2.0 * S0), fn(4.0 * S0)])
    r1 = 2.0 ** sigma
    w = (r1 * v[1:] - v[:-1]) / (r1 - 1.0)
    r2 = 2.0 ** (2.0 * sigma)
    out = (r2 * w[1] - w[0]) / (r2 - 1.0)
    return float(out), float(abs(out - w[1]))
