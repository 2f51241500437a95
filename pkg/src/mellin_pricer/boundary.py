"""American put critical asset price via an implicit approximation.

The boundary S*(t) solves a smooth-pasting approximation evaluated by a
bracketing root-finder.  Three formula modes are available:

``corrected`` (default)
    delta = (sigma/2 + (q-r)/sigma)^2 + 2r and the denominator carries
    exp(-q (T-t)).  With these two amendments the formula is exactly what a
    constant-boundary smooth-pasting derivation produces (delta - 2q then
    equals (sigma/2 - (q-r)/sigma)^2, a perfect square, so the radicands
    are always valid), and it reproduces the reference benchmark table.
``printed``
    delta = sigma/2 + (q-r)/sigma + 2r and exp(+q (T-t)), kept verbatim for
    comparison; raises NegativeRadicand where its radicands go negative.
``sigma-squared``
    delta = sigma^2/2 + (q-r)/sigma + 2r and exp(+q (T-t)); same guards.

Boundary curves are cached per rounded parameter tuple; cached curves are
immutable and shared, so repeated requests are bit-identical.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NegativeRadicand, NoBracket
from .mellin_core import BasketSpec

_SQRT2 = math.sqrt(2.0)

CRITICAL_PRICE_MODES = ("corrected", "printed", "sigma-squared")


def _norm_cdf(x):
    return 0.5 * math.erfc(-x / _SQRT2)


def _capf_terms(strike, r, q, sigma, tte, mode):
    """Scalars of the critical-price equation that do not depend on S."""
    if mode == "corrected":
        delta = (sigma / 2.0 + (q - r) / sigma) ** 2 + 2.0 * r
        exp_sign = -1.0
    elif mode == "printed":
        delta = sigma / 2.0 + (q - r) / sigma + 2.0 * r
        exp_sign = +1.0
    elif mode == "sigma-squared":
        delta = sigma**2 / 2.0 + (q - r) / sigma + 2.0 * r
        exp_sign = +1.0
    else:
        raise ValueError(f"unknown critical-price mode {mode!r}")
    if delta < 0.0:
        raise NegativeRadicand(f"delta = {delta} < 0 (mode={mode})")
    rad = delta - 2.0 * q
    if rad < 0.0:
        if mode == "corrected" and rad > -1e-13:
            rad = 0.0  # exact perfect square, rounding only
        else:
            raise NegativeRadicand(f"delta - 2q = {rad} < 0 (mode={mode})")
    sq_delta = math.sqrt(delta)
    two_n_minus_1 = 2.0 * _norm_cdf(math.sqrt(delta * tte)) - 1.0
    b1 = math.sqrt(rad)
    omega = (2.0 * q + sigma * b1) / (2.0 * sigma * sq_delta) * two_n_minus_1
    n_b1 = _norm_cdf(b1 * math.sqrt(tte))
    numer = strike * r / (sigma * sq_delta) * two_n_minus_1
    exp_q = math.exp(exp_sign * q * tte)
    return numer, exp_q, n_b1, omega


def _capf_denominator(s, t, spec, mode):
    tte = spec.maturity - t
    if tte <= 0:
        raise ValueError("requires t < maturity")
    r, q, sigma = spec.rate, float(spec.dividends[0]), float(spec.vols[0])
    numer, exp_q, n_b1, omega = _capf_terms(spec.strike, r, q, sigma, tte, mode)
    kappa = ((math.log(s / spec.strike) + (r - q + sigma**2 / 2.0) * tte)
             / (sigma * math.sqrt(tte)))
    den = exp_q * (_norm_cdf(kappa) - n_b1) + omega + 0.5
    return numer, den


def capf_residual(s, t, spec: BasketSpec, mode="corrected"):
    """G(s) = s - RHS(s) of the critical-price equation at calendar time t.

    Where the denominator underflows to 0 (deep below the root for q = 0)
    the residual is -inf.
    """
    if spec.n != 1:
        raise ValueError("critical price approximation is single-asset only")
    numer, den = _capf_denominator(s, t, spec, mode)
    if den == 0.0:
        return -math.inf if numer > 0 else s
    return s - numer / den


def critical_price_approx(t, spec: BasketSpec, mode="corrected"):
    """Critical asset price S*(t) of the American put, single asset.

    Solves G(S*) = 0 by Brent's method on [K*1e-6, K], expanding the upper
    end to 2K if needed.  Converged root satisfies |G| < 1e-10 K.

    Limits: at t = T the root degenerates to K min(1, r/q) (K when q = 0);
    for r = 0 early exercise is never optimal and 0 is returned.
    """
    if spec.n != 1:
        raise ValueError("critical price approximation is single-asset only")
    if not 0 <= t <= spec.maturity:
        raise ValueError("require 0 <= t <= maturity")
    r, q = spec.rate, float(spec.dividends[0])
    if r == 0.0:
        return 0.0
    tte = spec.maturity - t
    if tte <= 0.0:
        return spec.strike * min(1.0, r / q) if q > 0 else spec.strike

    # Solve the singularity-free rescaling s*den(s) - num = 0 (same root;
    # the raw G(s) = s - num/den has a 1/den blow-up deep below the root
    # when q = 0), then check convergence on G itself.
    def f(s):
        numer, den = _capf_denominator(s, t, spec, mode)
        return s * den - numer

    lo, hi = spec.strike * 1e-6, spec.strike
    if f(lo) * f(hi) > 0:
        hi = 2.0 * spec.strike
        if f(lo) * f(hi) > 0:
            raise NoBracket(
                f"no sign change on [{lo}, {hi}] at t={t} (mode={mode})")
    root = brentq(f, lo, hi, xtol=1e-13 * spec.strike, rtol=8.9e-16)
    if abs(capf_residual(root, t, spec, mode)) > 1e-10 * spec.strike:
        raise NoBracket(
            f"root did not converge: |G| = "
            f"{abs(capf_residual(root, t, spec, mode))}")
    return root


@dataclass(frozen=True)
class BoundaryCurve:
    """Critical prices sampled on the pricer's time grid.

    ``times`` are times to expiry theta_l = l*tau/(M-1), ascending, and
    ``values[l]`` = S* at time-to-expiry ``times[l]`` (i.e. at calendar time
    T - times[l]).  The premium integrand at pricer time t_l reads the value
    for time-to-expiry tau - t_l through :meth:`at_tte`.
    """

    times: np.ndarray
    values: np.ndarray
    spec_hash: tuple

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise ValueError("times/values length mismatch")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("boundary values must be finite and nonnegative")

    @property
    def m(self):
        return self.times.shape[0]

    def at_tte(self, theta):
        """Value at time-to-expiry theta, which must lie on the grid."""
        idx = int(round(theta / self.times[-1] * (self.m - 1))) if self.times[-1] > 0 else 0
        if not (0 <= idx < self.m) or abs(self.times[idx] - theta) > 1e-9:
            raise KeyError(f"time-to-expiry {theta} not on the boundary grid")
        return float(self.values[idx])

    def to_csv(self, fp):
        """Write `t,s_star` rows (t = time to expiry, ascending)."""
        fp.write("t,s_star\n")
        for t, v in zip(self.times, self.values):
            fp.write(f"{t:.12g},{v:.12g}\n")


_curve_cache: dict = {}
_cache_lock = threading.Lock()


def boundary_curve(spec: BasketSpec, m_steps, tau, mode="corrected"):
    """Critical prices on the M-point time grid, cached per parameter tuple.

    Samples S* at times-to-expiry l*tau/(M-1), l = 0..M-1.  Two calls with
    identical (rounded) parameters return the same immutable curve object.
    """
    if m_steps < 1:
        raise ValueError("m_steps must be >= 1")
    if not 0 < tau <= spec.maturity + 1e-12:
        raise ValueError("require 0 < tau <= maturity")
    key = spec.param_key(extra=(int(m_steps), round(float(tau), 12), mode))
    with _cache_lock:
        hit = _curve_cache.get(key)
    if hit is not None:
        return hit

    if m_steps == 1:
        tte = np.array([tau])
    else:
        tte = np.arange(m_steps) * (tau / (m_steps - 1))
    values = np.array([
        critical_price_approx(spec.maturity - th, spec, mode) for th in tte])
    tte.setflags(write=False)
    values.setflags(write=False)
    curve = BoundaryCurve(times=tte, values=values, spec_hash=key)
    with _cache_lock:
        _curve_cache.setdefault(key, curve)
        return _curve_cache[key]


def clear_boundary_cache():
    with _cache_lock:
        _curve_cache.clear()


def boundary_residual_cap(curve: BoundaryCurve, t, spec: BasketSpec, grid,
                          mode="corrected"):
    """Residual of the exact free-boundary condition at calendar time t.

    Evaluates K - S*(t) - [European term - premium term] with both Mellin
    inversions computed by the pricer's truncated trapezoid sum at the
    single point S = S*(t) (no FFT).  A diagnostic of how well the
    approximate boundary satisfies the exact smooth-pasted condition; not a
    solver.  Single-asset only.
    """
    if spec.n != 1:
        raise ValueError("residual diagnostic is single-asset only")
    # local import: fft_pricer depends on this module
    from .fft_pricer import discounted_payoff_transform, premium_transform

    tte = spec.maturity - t
    s_star = curve.at_tte(tte)
    if s_star <= 0.0:
        return spec.strike - 0.0  # empty exercise region, r = 0 limit
    w = grid.strip_a[0] + 1j * grid.frequencies(0)
    w = w[:, None]
    g_hat = discounted_payoff_transform(w, spec, tte)
    if tte > 0:
        sub = boundary_curve(spec, curve.m, tte, mode=mode)
        h_hat = premium_transform(w, spec, tte, sub, time_mode="simpson")
    else:
        h_hat = np.zeros_like(g_hat)
    kernel = np.exp(-np.sum(w, axis=-1) * math.log(s_star))
    quad_w = grid.deltas[0] / (2.0 * math.pi)
    euro = float(np.sum((g_hat - h_hat) * kernel).real * quad_w)
    return spec.strike - s_star - euro
