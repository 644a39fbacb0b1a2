"""Shifted lattice log-theta potential and its first two derivatives.

The potential is

    L_a(lam) = log sum_{j in Z} exp(-lam * (j + a)**2),

the log-partition function of the Gibbs distribution on the shifted lattice
``Z + a``.  Its entropy is ``L_a - lam * L_a'`` and its variance ``-L_a'``.

For ``lam >= pi`` the series is summed directly.  Below ``pi`` the Poisson
summation (modular) transform

    sum_j exp(-lam (j + a)^2) = sqrt(pi / lam) * sum_k exp(-pi^2 k^2 / lam) cos(2 pi k a)

is used instead, so both branches only ever sum a series with decay rate at
least ``exp(-pi)`` per term.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "ThetaEval",
    "log_theta",
    "log_theta_mp",
    "theta_sandwich",
    "default_max_terms",
    "CROSSOVER",
]

CROSSOVER = math.pi
DEFAULT_TOL = 1e-12
_DEFAULT_MAX_TERMS = 10**6
# exp(-x) underflows to zero past this
_EXP_UNDERFLOW = 745.0


def default_max_terms() -> int:
    """Term cap, overridable through the ``ENTGAUSS_MAX_TERMS`` variable."""
    raw = os.environ.get("ENTGAUSS_MAX_TERMS")
    if raw is None:
        return _DEFAULT_MAX_TERMS
    try:
        value = int(raw)
    except ValueError as exc:
        raise DomainError(f"ENTGAUSS_MAX_TERMS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise DomainError("ENTGAUSS_MAX_TERMS must be positive")
    return value


@dataclass(frozen=True)
class ThetaEval:
    """Value and derivatives of ``L_a`` at one point.

    Attributes
    ----------
    lam : float
        Inverse temperature, > 0.
    shift_a : float
        Lattice shift in [0, 1).
    L, dL, d2L : float
        ``L_a(lam)``, ``L_a'(lam)`` and ``L_a''(lam)``.
    truncation_terms : int
        Number of series terms summed.
    abs_error_bound : float
        Certified bound on the truncation error of ``L``.
    """

    lam: float
    shift_a: float
    L: float
    dL: float
    d2L: float
    truncation_terms: int
    abs_error_bound: float

    @property
    def entropy(self) -> float:
        """Entropy (nats) of the Gibbs distribution, the tangent's y-intercept."""
        return self.L - self.lam * self.dL

    @property
    def variance(self) -> float:
        """Second moment about zero of the Gibbs distribution on ``Z + a``."""
        return -self.dL


def _log_tail_majorant(lam, u0, power):
    """Log of an upper bound on sum_{n>=0} (u0+n)^power exp(-lam (u0+n)^2).

    Uses the geometric bound on consecutive term ratios; returns +inf when
    that ratio is not below one.
    """
    log_first = power * math.log(u0) - lam * u0 * u0
    log_q = power * math.log1p(1.0 / u0) - lam * (2.0 * u0 + 1.0)
    if log_q >= 0.0:
        return math.inf
    return log_first - math.log(-math.expm1(log_q))


def _tail_ok(log_tail, partial, tol):
    # tail <= tol * partial, tested in log space
    if partial <= 0.0:
        return True
    return log_tail <= math.log(tol * partial)


def _weighted_moments(u2, w):
    """Return (sum w, mean u2, centred variance of u2) under weights w."""
    s0 = math.fsum(w)
    m1 = math.fsum(w * u2) / s0
    centred = u2 - m1
    var = math.fsum(w * centred * centred) / s0
    return s0, m1, var


def _direct(lam, a, tol, max_terms):
    # K counts lattice points on each side; first omitted |u| is >= K + 1
    K = max(1, int(math.ceil(math.sqrt(max(math.log(1.0 / tol), 1.0) / lam))))
    while True:
        n_terms = 2 * K + 2
        if n_terms > max_terms:
            raise ConvergenceError(
                f"theta series needs more than {max_terms} terms at lam={lam!r}"
            )
        j = np.arange(-K - 1, K + 1, dtype=float)
        u = j + a
        u2 = u * u
        e_max = -lam * float(np.min(u2))
        w = np.exp(-lam * u2 - e_max)
        s0, m1, var = _weighted_moments(u2, w)
        u0 = K + 1.0
        # tails relative to the partial sums, which are scaled by exp(-e_max)
        shift = math.log(2.0) - e_max
        lt0 = _log_tail_majorant(lam, u0, 0) + shift
        lt1 = _log_tail_majorant(lam, u0, 2) + shift
        lt2 = _log_tail_majorant(lam, u0, 4) + shift
        s1 = m1 * s0
        s2 = (var + m1 * m1) * s0
        quarter = 0.25 * tol
        ok = _tail_ok(lt0, s0, quarter) and _tail_ok(lt1, s1, quarter) and _tail_ok(lt2, s2, quarter)
        if ok:
            break
        K *= 2
    imax = int(np.argmax(w))
    rest = math.fsum(np.delete(w, imax))
    L = e_max + math.log1p(rest)
    return ThetaEval(
        lam=lam,
        shift_a=a,
        L=L,
        dL=-m1,
        d2L=var,
        truncation_terms=n_terms,
        abs_error_bound=math.exp(lt0) / s0,
    )


def _dual_coefficients(k, a):
    if a == 0.0:
        return np.ones_like(k)
    if a == 0.5:
        return np.where(np.mod(k, 2.0) == 0.0, 1.0, -1.0)
    return np.cos(2.0 * math.pi * k * a)


def _modular(lam, a, tol, max_terms):
    mu = math.pi**2 / lam
    base_L = 0.5 * math.log(math.pi / lam)
    base_dL = -0.5 / lam
    base_d2L = 0.5 / (lam * lam)
    if mu > _EXP_UNDERFLOW:
        # every k != 0 term underflows
        return ThetaEval(lam, a, base_L, base_dL, base_d2L, 1, 0.0)
    K = max(1, int(math.ceil(math.sqrt(max(math.log(1.0 / tol), 1.0) / mu))))
    while True:
        n_terms = 2 * K + 1
        if n_terms > max_terms:
            raise ConvergenceError(
                f"dual theta series needs more than {max_terms} terms at lam={lam!r}"
            )
        k = np.arange(1, K + 1, dtype=float)
        c = _dual_coefficients(k, a)
        e = np.exp(-mu * k * k)
        ce = c * e
        rest = 2.0 * math.fsum(ce)
        T = 1.0 + rest
        M1 = 2.0 * math.fsum(ce * k * k) / T
        M2 = 2.0 * math.fsum(ce * k**4) / T
        u0 = K + 1.0
        lt0 = math.log(2.0) + _log_tail_majorant(mu, u0, 0)
        lt4 = math.log(2.0) + _log_tail_majorant(mu, u0, 4)
        # the dominant parts of dL and d2L are exact; the dual series only
        # contributes corrections bounded by these tails
        if _tail_ok(lt0, T, 0.25 * tol) and _tail_ok(lt4, T, 0.25 * tol):
            break
        K *= 2
    ratio = mu / lam
    L = base_L + math.log1p(rest)
    dL = base_dL + ratio * M1
    d2L = base_d2L - 2.0 * mu * M1 / (lam * lam) + ratio * ratio * (M2 - M1 * M1)
    return ThetaEval(
        lam=lam,
        shift_a=a,
        L=L,
        dL=dL,
        d2L=d2L,
        truncation_terms=n_terms,
        abs_error_bound=math.exp(lt0) / T,
    )


def log_theta(lam, shift_a=0.0, tol=DEFAULT_TOL, max_terms=None) -> ThetaEval:
    """Evaluate ``L_a(lam)`` with its first two derivatives.

    Parameters
    ----------
    lam : float
        Positive inverse temperature.
    shift_a : float, optional
        Lattice shift in [0, 1).  Default 0.
    tol : float, optional
        Target absolute accuracy of ``L`` (and relative accuracy of ``dL``).
    max_terms : int, optional
        Series term cap; defaults to :func:`default_max_terms`.

    Returns
    -------
    ThetaEval

    Raises
    ------
    DomainError
        If ``lam <= 0``, ``shift_a`` is outside [0, 1) or ``tol <= 0``.
    ConvergenceError
        If the required number of terms exceeds the cap.
    """
    lam = float(lam)
    a = float(shift_a)
    tol = float(tol)
    if not lam > 0.0 or math.isnan(lam):
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if not 0.0 <= a < 1.0:
        raise DomainError(f"shift must lie in [0, 1), got {a!r}")
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if max_terms is None:
        max_terms = default_max_terms()
    if math.isinf(lam):
        # only the lattice point(s) nearest the origin survive
        if a == 0.0:
            return ThetaEval(lam, a, 0.0, -0.0, 0.0, 1, 0.0)
        raise DomainError("infinite lambda is only supported for shift 0")
    if lam >= CROSSOVER:
        return _direct(lam, a, tol, max_terms)
    return _modular(lam, a, tol, max_terms)


def theta_sandwich(lam, regime):
    """Elementary lower and upper bounds on ``exp(L_0(lam))``.

    Both pairs hold for every ``lam > 0``; ``"small"`` is tight for
    ``lam << pi`` and ``"large"`` for ``lam >> pi``.

    Returns
    -------
    (lower, upper) : tuple of float
    """
    lam = float(lam)
    if not lam > 0.0:
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if regime == "small":
        q = math.exp(-math.pi**2 / lam)
        lower = math.sqrt(math.pi / lam) * (1.0 + 2.0 * q)
        return lower, lower + q
    if regime == "large":
        q = math.exp(-lam)
        lower = 1.0 + 2.0 * q
        return lower, lower + math.sqrt(math.pi / lam) * q
    raise DomainError(f"regime must be 'small' or 'large', got {regime!r}")


def log_theta_mp(lam, shift_a, dps):
    """``(L_a, L_a', L_a'')`` as mpmath numbers at ``dps`` decimal digits.

    Differences between shifts shrink like ``exp(-pi^2 / lam)`` and fall
    below double precision once ``lam`` is small, so comparisons between
    ``L_0`` and ``L_{1/2}`` there need extended precision.  ``shift_a`` must
    be 0 or 1/2 (or an exact mpmath value).  Terms are summed until they
    fall below ``10**-dps`` relative to the leading one.
    """
    import mpmath

    with mpmath.workdps(dps + 10):
        lam = mpmath.mpf(lam)
        a = mpmath.mpf(shift_a)
        if not lam > 0:
            raise DomainError(f"lambda must be positive, got {lam!r}")
        eps = mpmath.mpf(10) ** (-dps - 5)
        pi = mpmath.pi
        if lam >= pi:
            s0 = s1 = s2 = mpmath.mpf(0)
            # u = j + a over j = 0, 1, -1, 2, -2, ...
            j = 0
            while True:
                batch = [j + a] if j == 0 else [j + a, -j + a]
                small = True
                for u in batch:
                    u2 = u * u
                    w = mpmath.exp(-lam * u2)
                    s0 += w
                    s1 += u2 * w
                    s2 += u2 * u2 * w
                    if w > eps * s0:
                        small = False
                if small and j > 1:
                    break
                j += 1
            m1 = s1 / s0
            L, dL, d2L = mpmath.log(s0), -m1, s2 / s0 - m1 * m1
        else:
            mu = pi * pi / lam
            T = mpmath.mpf(1)
            t1 = t2 = mpmath.mpf(0)
            k = 1
            while True:
                e = 2 * mpmath.cos(2 * pi * k * a) * mpmath.exp(-mu * k * k)
                T += e
                t1 += e * k * k
                t2 += e * k**4
                if abs(e) <= eps:
                    break
                k += 1
            M1, M2 = t1 / T, t2 / T
            ratio = mu / lam
            L = mpmath.log(pi / lam) / 2 + mpmath.log(T)
            dL = -1 / (2 * lam) + ratio * M1
            d2L = 1 / (2 * lam * lam) - 2 * mu * M1 / (lam * lam) + ratio * ratio * (M2 - M1 * M1)
        return +L, +dL, +d2L
