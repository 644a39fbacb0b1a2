"""Capacity-achieving discrete Gaussian for a given input entropy.

For an entropy budget ``h`` (nats) the high-SNR optimal input is the discrete
Gaussian with spacing ``d_h = 1 / sqrt(-L'(lam_h))`` and inverse temperature
``lam_h``, the unique root of

    g(lam) = L(lam) - lam * L'(lam) = h.

``g`` is the y-intercept of the tangent to ``L`` at ``lam``; it is strictly
decreasing because ``g'(lam) = -lam * L''(lam) < 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import BracketError, ConvergenceError, DomainError
from .theta import log_theta

__all__ = [
    "SolveResult",
    "solve",
    "solve_shifted",
    "tangent_entropy",
    "threshold_entropy",
    "d_h_approx",
    "lambda_h_approx",
    "lambert_w_minus1",
    "gap_exponent",
    "gap_exponent_approx",
    "BITS",
    "to_nats",
    "from_nats",
]

BITS = math.log(2.0)
_INV_E = math.exp(-1.0)
_BRACKET_EXPANSIONS = 200
_MAX_ITER = 200


def to_nats(value, units):
    """Convert an entropy in ``units`` ("bits" or "nats") to nats."""
    if units == "nats":
        return float(value)
    if units == "bits":
        return float(value) * BITS
    raise DomainError(f"units must be 'bits' or 'nats', got {units!r}")


def from_nats(value, units):
    """Convert an entropy in nats to ``units``."""
    if units == "nats":
        return float(value)
    if units == "bits":
        return float(value) / BITS
    raise DomainError(f"units must be 'bits' or 'nats', got {units!r}")


@dataclass(frozen=True)
class SolveResult:
    """Solution of the tangent equation for one entropy target.

    ``entropy_residual`` is ``g(lambda_h) - h_target`` and ``variance_check``
    the second moment of the discrete Gaussian with spacing ``d_h``, which
    should equal one.
    """

    h_target: float
    lambda_h: float
    d_h: float
    entropy_residual: float
    variance_check: float
    regime: str
    iterations: int

    def to_dict(self, units="nats"):
        return {
            "h": from_nats(self.h_target, units),
            "units": units,
            "h_nats": self.h_target,
            "lambda_h": self.lambda_h,
            "d_h": self.d_h,
            "regime": self.regime,
            "entropy_residual": self.entropy_residual,
            "variance_check": self.variance_check,
            "iterations": self.iterations,
        }


def tangent_entropy(lam, shift_a=0.0):
    """``L_a(lam) - lam L_a'(lam)``, the y-intercept of the tangent at ``lam``."""
    return log_theta(lam, shift_a).entropy


@lru_cache(maxsize=None)
def threshold_entropy() -> float:
    """Entropy (nats) at ``lam = pi`` separating the small and large regimes."""
    return tangent_entropy(math.pi)


def lambert_w_minus1(y):
    """Lower real branch of the Lambert W function.

    Returns ``w <= -1`` with ``w * exp(w) == y`` for ``-1/e <= y < 0``.
    Halley iteration, seeded by the branch-point series near ``-1/e`` and by
    ``log(-y) - log(-log(-y))`` elsewhere.
    """
    y = float(y)
    if not y < 0.0 or y < -_INV_E * (1.0 + 4e-16):
        raise DomainError(f"W_-1 is defined on [-1/e, 0), got {y!r}")
    arg = 2.0 * (1.0 + math.e * y)
    if arg <= 0.0:
        return -1.0
    if y < -0.25:
        p = -math.sqrt(arg)
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    else:
        ly = math.log(-y)
        w = ly - math.log(-ly)
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - y
        wp1 = w + 1.0
        # near the branch point the iteration cycles at roundoff level
        if wp1 == 0.0 or abs(f) <= 4e-16 * abs(y):
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if w_new > -1.0:
            w_new = 0.5 * (w - 1.0)
        if abs(w_new - w) <= 4e-16 * abs(w_new):
            w = w_new
            break
        w = w_new
    else:
        raise ConvergenceError(f"W_-1 iteration did not converge for y={y!r}")
    return w


def lambda_h_approx(h, regime):
    """Closed-form approximation of ``lam_h`` (``h`` in nats).

    ``"large"`` inverts ``h ~ 0.5 log(pi e / lam)``; ``"small"`` inverts
    ``h ~ 2 lam exp(-lam)`` through ``W_-1`` and needs ``h < 2/e``.
    """
    h = float(h)
    if not h > 0.0:
        raise DomainError(f"h must be positive, got {h!r}")
    if regime == "large":
        return math.pi * math.e * math.exp(-2.0 * h)
    if regime == "small":
        if h / 2.0 >= _INV_E:
            return math.nan
        return -lambert_w_minus1(-h / 2.0)
    raise DomainError(f"regime must be 'small' or 'large', got {regime!r}")


def _bracket(h, shift_a):
    seeds = [lambda_h_approx(h, "large")]
    small = lambda_h_approx(h, "small")
    seeds.append(small if math.isfinite(small) else math.pi)
    lo = max(min(seeds) / 4.0, 1e-300)
    hi = max(seeds) * 4.0
    for _ in range(_BRACKET_EXPANSIONS):
        if tangent_entropy(lo, shift_a) >= h:
            break
        lo = max(lo / 4.0, 1e-300)
    else:
        raise BracketError(f"could not bracket lambda_h from below for h={h!r}")
    for _ in range(_BRACKET_EXPANSIONS):
        if tangent_entropy(hi, shift_a) <= h:
            break
        hi *= 4.0
    else:
        raise BracketError(f"could not bracket lambda_h from above for h={h!r}")
    return lo, hi


def _solve_lambda(h, shift_a, tol):
    """Safeguarded Newton on ``g(lam) = h`` in the variable ``log lam``."""
    lo, hi = _bracket(h, shift_a)
    x_lo, x_hi = math.log(lo), math.log(hi)
    target = tol * min(1.0, h)
    x = 0.5 * (x_lo + x_hi)
    for it in range(1, _MAX_ITER + 1):
        lam = math.exp(x)
        t = log_theta(lam, shift_a)
        r = t.entropy - h
        if abs(r) <= target:
            return lam, t, r, it
        # g decreasing: positive residual means lam is too small
        if r > 0.0:
            x_lo = x
        else:
            x_hi = x
        if x_hi - x_lo <= 4e-16 * max(1.0, abs(x)):
            return lam, t, r, it
        slope = -lam * lam * t.d2L
        x_new = x - r / slope if slope < 0.0 else math.nan
        if not x_lo < x_new < x_hi:
            x_new = 0.5 * (x_lo + x_hi)
        x = x_new
    raise ConvergenceError(f"tangent equation did not converge for h={h!r}")


def solve(h, tol=1e-12) -> SolveResult:
    """Find ``lam_h`` and ``d_h`` for entropy ``h`` (nats).

    Parameters
    ----------
    h : float
        Entropy target in nats, > 0.
    tol : float, optional
        Residual tolerance, relative to ``min(1, h)``.

    Raises
    ------
    DomainError
        If ``h`` is not a positive finite number.
    BracketError
        If the root cannot be bracketed.
    """
    h = float(h)
    if not (h > 0.0 and math.isfinite(h)):
        raise DomainError(f"entropy must be positive and finite, got {h!r}")
    lam, t, r, it = _solve_lambda(h, 0.0, tol)
    d_h = 1.0 / math.sqrt(-t.dL)
    regime = "below_threshold" if h < threshold_entropy() else "above_threshold"
    return SolveResult(
        h_target=h,
        lambda_h=lam,
        d_h=d_h,
        entropy_residual=r,
        variance_check=-t.dL * d_h * d_h,
        regime=regime,
        iterations=it,
    )


def solve_shifted(h, shift_a, tol=1e-12):
    """Root of ``L_a(lam) - lam L_a'(lam) = h`` for a general shift.

    Returns
    -------
    (lam, ThetaEval)
        The root and the potential evaluated there.

    Raises
    ------
    BracketError
        If no tangent has y-intercept ``h`` (e.g. ``h <= log 2`` for ``a = 1/2``).
    """
    h = float(h)
    if not (h > 0.0 and math.isfinite(h)):
        raise DomainError(f"entropy must be positive and finite, got {h!r}")
    shift_a = float(shift_a)
    # two lattice points tie for the minimum of |j + 1/2|, so the entropy floor is log 2
    if shift_a == 0.5 and h <= math.log(2.0):
        raise BracketError(f"no a=1/2 tangent has intercept h={h!r} <= log 2")
    lam, t, _, _ = _solve_lambda(h, shift_a, tol)
    return lam, t


def d_h_approx(h, regime):
    """Closed-form approximation of ``d_h`` (``h`` in nats).

    ``"small"`` gives ``sqrt(log(2/h) / h)`` (nan for ``h >= 2``, where the
    formula has no meaning); ``"large"`` gives ``sqrt(2 pi e) exp(-h)``.
    Either may be requested at any ``h``; away from its own regime the
    result is inaccurate.
    """
    h = float(h)
    if not h > 0.0:
        raise DomainError(f"h must be positive, got {h!r}")
    if regime == "small":
        if h >= 2.0:
            return math.nan
        return math.sqrt(math.log(2.0 / h) / h)
    if regime == "large":
        return math.sqrt(2.0 * math.pi * math.e) * math.exp(-h)
    raise DomainError(f"regime must be 'small' or 'large', got {regime!r}")


def gap_exponent(h):
    """Decay rate ``d_h**2 / 8`` (per unit snr) of ``h - C_H(h, snr)``."""
    return solve(h).d_h ** 2 / 8.0


def gap_exponent_approx(h, regime):
    """Closed-form decay rate in the small or large entropy regime."""
    h = float(h)
    if not h > 0.0:
        raise DomainError(f"h must be positive, got {h!r}")
    if regime == "small":
        if h >= 2.0:
            return math.nan
        return math.log(2.0 / h) / (8.0 * h)
    if regime == "large":
        return math.pi * math.e / 4.0 * math.exp(-2.0 * h)
    raise DomainError(f"regime must be 'small' or 'large', got {regime!r}")
