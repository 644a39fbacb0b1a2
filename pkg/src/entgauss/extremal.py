"""Numerical evidence for the extremal properties of the discrete Gaussian.

Among unit-power distributions with entropy ``h``, the discrete Gaussian
``N^{d_h}(lam_h)`` has the largest minimum distance.  This module searches
finite-support candidates for counterexamples and checks the identities and
inequalities the optimality argument relies on.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np

from .distributions import DiscreteDistribution
from .errors import ConvergenceError, DomainError, PrecisionError
from .solver import solve, solve_shifted
from .theta import log_theta, log_theta_mp

__all__ = [
    "SearchReport",
    "dmin_search",
    "duality_check",
    "shift_comparison",
    "tangent_lemma_check",
    "variance_gap",
    "equal_spacing_translate",
    "aligned_total_variation",
    "HALF_SHIFT_LIMIT_VARIANCE",
]

MAX_ATOMS = 12
# tangents to L_{1/2} approach the asymptote log 2 - lam/4 as lam -> inf
HALF_SHIFT_LIMIT_VARIANCE = 0.25
_CHUNK = 2048
_STEPS = 160


@dataclass(frozen=True, eq=False)
class SearchReport:
    """Outcome of :func:`dmin_search`.

    ``best_candidate`` is ``None`` when no trial was run.
    """

    h_target: float
    n_atoms: int
    best_dmin_found: float
    d_h_reference: float
    trials: int
    best_candidate: DiscreteDistribution | None
    seed: int

    @property
    def ratio(self):
        return self.best_dmin_found / self.d_h_reference

    def to_dict(self):
        return {
            "h_target": self.h_target,
            "n_atoms": self.n_atoms,
            "best_dmin_found": self.best_dmin_found,
            "d_h_reference": self.d_h_reference,
            "ratio": self.ratio,
            "trials": self.trials,
            "seed": self.seed,
            "best_candidate": None if self.best_candidate is None else self.best_candidate.to_dict(),
        }


def _lse(z):
    m = z.max(axis=1, keepdims=True)
    return m + np.log(np.exp(z - m).sum(axis=1, keepdims=True))


def _temper(logp, h, iters=40):
    """Per row, tempered log-probabilities ``t * log p - log Z(t)`` with entropy ``h``.

    Entropy falls monotonically in ``t`` from ``log n`` at ``t = 0``, with
    slope ``-t Var_t(log p)``.  Safeguarded Newton from ``t = 1``: steps
    leaving the current bracket are replaced by bisection (or doubling while
    no upper end is known).
    """
    rows = logp.shape[0]
    t = np.ones(rows)
    lo = np.zeros(rows)
    hi = np.full(rows, np.inf)
    for _ in range(iters):
        z = t[:, None] * logp
        lq = z - _lse(z)
        q = np.exp(lq)
        H = -np.sum(q * lq, axis=1)
        r = H - h
        if np.all(np.abs(r) <= 1e-13):
            return lq
        above = r > 0.0
        lo = np.where(above, t, lo)
        hi = np.where(above, hi, t)
        mean = np.sum(q * logp, axis=1)
        var = np.sum(q * (logp - mean[:, None]) ** 2, axis=1)
        slope = -t * var
        with np.errstate(divide="ignore", invalid="ignore"):
            t_new = t - r / slope
        fallback = np.where(np.isinf(hi), 2.0 * t + 1.0, 0.5 * (lo + hi))
        ok = np.isfinite(t_new) & (t_new > lo) & (t_new < hi)
        t = np.where(np.abs(r) <= 1e-13, t, np.where(ok, t_new, fallback))
    z = t[:, None] * logp
    return z - _lse(z)


def _objective(log_gaps, logq):
    """Minimum gap of the centred, unit-power rescaling of each row."""
    gaps = np.exp(log_gaps)
    x = np.concatenate([np.zeros((gaps.shape[0], 1)), np.cumsum(gaps, axis=1)], axis=1)
    q = np.exp(logq)
    mean = np.sum(q * x, axis=1, keepdims=True)
    var = np.sum(q * (x - mean) ** 2, axis=1)
    return gaps.min(axis=1) / np.sqrt(var)


def _search_chunk(h, n, size, rng):
    theta = rng.normal(0.0, 1.5, (size, n))
    log_gaps = rng.normal(0.0, 0.5, (size, n - 1))
    logq = _temper(theta - _lse(theta), h)
    best = _objective(log_gaps, logq)
    step = np.full(size, 0.3)
    for it in range(_STEPS):
        if it % 4 == 3:
            # pulling gaps toward the smallest one keeps d_min and cuts the variance
            alpha = rng.uniform(0.0, 1.0, (size, 1))
            g_new = log_gaps - alpha * (log_gaps - log_gaps.min(axis=1, keepdims=True))
            lq_new = logq + step[:, None] * 0.3 * rng.standard_normal((size, n))
        else:
            g_new = log_gaps + step[:, None] * rng.standard_normal((size, n - 1))
            lq_new = logq + step[:, None] * rng.standard_normal((size, n))
        lq_new = _temper(lq_new - _lse(lq_new), h)
        val = _objective(g_new, lq_new)
        better = val > best
        log_gaps = np.where(better[:, None], g_new, log_gaps)
        logq = np.where(better[:, None], lq_new, logq)
        best = np.where(better, val, best)
        step = np.clip(np.where(better, step * 1.3, step * 0.85), 1e-4, 1.0)
    k = int(np.argmax(best))
    return float(best[k]), log_gaps[k], logq[k]


def _candidate(log_gaps, logq, h):
    gaps = np.exp(log_gaps)
    x = np.concatenate([[0.0], np.cumsum(gaps)])
    # final polish of the entropy constraint on this one row
    logq = _temper(logq[None, :], h)[0]
    q = np.exp(logq)
    q = q / math.fsum(q)
    mean = math.fsum(q * x)
    x = x - mean
    x = x / math.sqrt(math.fsum(q * x * x))
    return DiscreteDistribution(x, q)


def dmin_search(h, n_atoms, trials, seed, workers=None) -> SearchReport:
    """Random-restart local search for large minimum distance.

    Each trial starts from random log-gaps and logits and hill-climbs.  Every
    proposal is projected onto the constraint set.  Probabilities are
    tempered (``p_i ∝ p_i**t``) to entropy ``h``.  The atoms are centred
    and rescaled to unit second moment.

    Parameters
    ----------
    h : float
        Entropy in nats, ``0 < h <= log(n_atoms)``.
    n_atoms : int
        Support size, 2 to 12.
    trials : int
        Number of restarts (0 gives an empty report).
    seed : int
        Master seed; trial chunks draw from spawned child seeds, so the
        result does not depend on ``workers``.
    workers : int, optional
        Threads used to run chunks concurrently.
    """
    h = float(h)
    n = int(n_atoms)
    trials = int(trials)
    if not 2 <= n <= MAX_ATOMS:
        raise DomainError(f"n_atoms must lie in [2, {MAX_ATOMS}], got {n_atoms!r}")
    if not (h > 0.0 and math.isfinite(h)):
        raise DomainError(f"entropy must be positive, got {h!r}")
    if h > math.log(n) * (1.0 + 1e-12):
        raise DomainError(f"h={h:.6g} nats is infeasible with {n} atoms (max log n = {math.log(n):.6g})")
    if trials < 0:
        raise DomainError("trials must be nonnegative")
    d_ref = solve(h).d_h
    if trials == 0:
        return SearchReport(h, n, 0.0, d_ref, 0, None, int(seed))

    sizes = [min(_CHUNK, trials - s) for s in range(0, trials, _CHUNK)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(k):
        return _search_chunk(h, n, sizes[k], np.random.default_rng(children[k]))

    if workers and workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(len(sizes))))
    else:
        results = [run(k) for k in range(len(sizes))]
    # first maximum in chunk order keeps the aggregate deterministic
    k = max(range(len(results)), key=lambda i: (results[i][0], -i))
    cand = _candidate(results[k][1], results[k][2], h)
    dmin = float(np.min(np.diff(cand.atoms)))
    return SearchReport(h, n, dmin, d_ref, trials, cand, int(seed))


def aligned_total_variation(candidate: DiscreteDistribution, reference: DiscreteDistribution, step):
    """TV distance after snapping the candidate onto the reference lattice.

    Both distributions are translated so their modes sit at the origin.  Then
    each candidate atom is assigned to the nearest multiple of ``step``.
    """
    def snap(dist):
        mode = dist.atoms[int(np.argmax(dist.probs))]
        return np.rint((dist.atoms - mode) / step).astype(np.int64)

    ic, ir = snap(candidate), snap(reference)
    lo = min(ic.min(), ir.min())
    mass = np.zeros(max(ic.max(), ir.max()) - lo + 1)
    np.add.at(mass, ic - lo, candidate.probs)
    np.add.at(mass, ir - lo, -reference.probs)
    return 0.5 * float(np.abs(mass).sum())


def equal_spacing_translate(dist: DiscreteDistribution) -> DiscreteDistribution:
    """Replace atoms by an equally spaced grid with the same minimum gap.

    The grid keeps the atom of least magnitude fixed.  Every other atom moves
    toward it by whatever slack its neighbours' gaps allowed.  No atom moves
    away from the origin, so the second moment cannot increase.
    """
    x = dist.atoms
    if x.size < 2:
        return dist
    step = float(np.min(np.diff(x)))
    k = int(np.argmin(np.abs(x)))
    y = x[k] + step * (np.arange(x.size) - k)
    return DiscreteDistribution(y, dist.probs, lattice_step=step)


def duality_check(h):
    """Return ``(var_h, var_h * d_h**2)``; the product is exactly one in theory.

    ``var_h = -L'(lam_h)`` is the variance of the unit-spacing discrete Gaussian.
    """
    res = solve(h)
    var = log_theta(res.lambda_h).variance
    return var, var * res.d_h**2


_MAX_DPS = 60_000


def _working_digits(lam):
    # shift effects on L are of relative size exp(-pi^2 / lam)
    mu = math.pi**2 / lam
    dps = int(mu / math.log(10.0)) + 30
    if dps > _MAX_DPS:
        raise PrecisionError(
            f"the shift gap at lam={lam:.3g} needs {dps} digits (cap {_MAX_DPS})"
        )
    return dps


def _tangent_mp(h, a, lam0, dps):
    """Newton polish in ``log lam`` of the tangent equation at ``dps`` digits."""
    with mpmath.workdps(dps + 10):
        h = mpmath.mpf(h)
        x = mpmath.log(lam0)
        tol = mpmath.mpf(10) ** (-dps)
        for _ in range(200):
            lam = mpmath.exp(x)
            L, dL, d2L = log_theta_mp(lam, a, dps)
            r = L - lam * dL - h
            if abs(r) <= tol * max(1, h):
                return lam, -dL
            x -= r / (-lam * lam * d2L)
    raise ConvergenceError(f"extended-precision tangent solve failed for h={h}")


def shift_comparison(h):
    """Variances of the integer and half-integer lattice Gibbs laws at entropy ``h``.

    Both laws are the ones whose entropy equals ``h``.  The two variances
    agree to about ``exp(-pi^2 / lam_h)`` relative, far below double
    precision for large ``h``.  They are therefore computed in extended
    precision and returned as ``mpmath.mpf`` values.  Convert after
    comparing, not before.

    Returns
    -------
    (var_a0, var_a_half) : tuple of mpmath.mpf
        For ``h <= log 2`` no half-integer Gibbs law has entropy ``h``.  The
        infimum over the family, 1/4, is reported instead.

    Raises
    ------
    PrecisionError
        If resolving the gap would need more than 60000 digits, which
        happens beyond about 8 bits.
    """
    h = float(h)
    if not (h > 0.0 and math.isfinite(h)):
        raise DomainError(f"entropy must be positive, got {h!r}")
    lam0 = solve(h).lambda_h
    dps = _working_digits(lam0)
    _, var0 = _tangent_mp(h, 0, lam0, dps)
    if h <= math.log(2.0):
        # no tangent to L_{1/2} has this intercept; use the asymptote's slope
        var_half = mpmath.mpf(HALF_SHIFT_LIMIT_VARIANCE)
    else:
        lam_half, _ = solve_shifted(h, 0.5)
        _, var_half = _tangent_mp(h, mpmath.mpf(1) / 2, lam_half, max(dps, _working_digits(lam_half)))
    return var0, var_half


def variance_gap(h):
    """``log10(var_a_half - var_a0)`` and the gap relative to ``var_a0``, as floats."""
    var0, var_half = shift_comparison(h)
    with mpmath.workdps(30):
        gap = var_half - var0
        if not gap > 0:
            return -math.inf, 0.0
        return float(mpmath.log10(gap)), float(mpmath.log10(gap / var0))


def tangent_lemma_check(h):
    """Slopes of the tangents to ``L_0`` and ``L_{1/2}`` with y-intercept ``h``.

    Returns
    -------
    (slope_f, slope_g) : tuple of mpmath.mpf
        Both negative; ``|slope_f| < |slope_g|`` is expected.
    """
    var0, var_half = shift_comparison(h)
    # plain negation would round to the ambient 15 digits
    return mpmath.fneg(var0, exact=True), mpmath.fneg(var_half, exact=True)
