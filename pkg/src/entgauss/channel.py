"""Discrete input over additive white Gaussian noise.

``Y = X + Z`` with ``Z ~ N(0, 1/snr)``.  The conditional entropy is evaluated
atom by atom as

    H(X|Y) = sum_i p_i int phi(u) log(1 + sum_{j != i} (p_j/p_i)
                                   exp(-D_ij u - D_ij^2 / 2)) du,

with ``D_ij = (x_i - x_j) / sigma`` and ``u = (y - x_i) / sigma``.  Every
integrand is nonnegative, so the sum keeps full relative precision even when
``H(X|Y)`` is far below machine epsilon, which the difference form
``H(X) + 0.5 log(2 pi e sigma^2) - h(Y)`` cannot do.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .distributions import DiscreteDistribution, entropy, min_distance
from .errors import DomainError, PrecisionError, PreconditionError

__all__ = [
    "ChannelEval",
    "ExponentFit",
    "conditional_entropy",
    "conditional_entropy_sweep",
    "conditional_entropy_mc",
    "output_entropy",
    "hxy_upper_bound",
    "hxy_lower_bound",
    "hxy_lower_bound_best",
    "optimal_delta",
    "fit_exponent",
    "q_function",
    "r_function",
    "UNDERFLOW_FLOOR",
]

UNDERFLOW_FLOOR = 1e-280
MIN_TOL = 1e-13
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_MAX_PANELS = 400_000
_CHUNK_ELEMENTS = 1 << 21

# Gauss-Kronrod 7/15 nodes on [-1, 1]
_XK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144845693013,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]


def q_function(z):
    """Standard normal upper tail ``P(N(0,1) > z)``."""
    return 0.5 * special.erfc(np.asarray(z, dtype=float) / math.sqrt(2.0))


def r_function(z):
    """Second-moment tail ``int_z^inf u^2 phi(u) du = Q(z) + z phi(z)``."""
    z = np.asarray(z, dtype=float)
    return q_function(z) + z * np.exp(-0.5 * z * z - _LOG_SQRT_2PI)


@dataclass(frozen=True)
class ChannelEval:
    """Entropies (nats) of one input distribution at one SNR.

    ``underflow`` is set when ``H_X_given_Y`` is below the representable
    floor; it is then reported as 0 with an infinite error bound.
    """

    snr: float
    sigma: float
    H_X: float
    h_Y: float
    I_XY: float
    H_X_given_Y: float
    rel_error_bound: float
    underflow: bool = False
    panels: int = 0

    def to_dict(self, units="nats"):
        scale = 1.0 if units == "nats" else 1.0 / math.log(2.0)
        return {
            "snr": self.snr,
            "sigma": self.sigma,
            "units": units,
            "H_X": self.H_X * scale,
            "h_Y": self.h_Y * scale,
            "I_XY": self.I_XY * scale,
            "H_X_given_Y": self.H_X_given_Y * scale,
            "rel_error_bound": self.rel_error_bound,
            "underflow": self.underflow,
        }


@dataclass(frozen=True)
class ExponentFit:
    """Finite-SNR estimate of ``lim (1/snr) log H(X|Y)``."""

    snr_grid: tuple
    scaled_log_values: tuple
    hxy_values: tuple
    fitted_limit: float
    predicted_limit: float

    def to_dict(self):
        return {
            "snr_grid": list(self.snr_grid),
            "scaled_log_values": list(self.scaled_log_values),
            "H_X_given_Y": list(self.hxy_values),
            "fitted_limit": self.fitted_limit,
            "predicted_limit": self.predicted_limit,
        }


def _check_snr(snr):
    snr = float(snr)
    if not (snr > 0.0 and math.isfinite(snr)):
        raise DomainError(f"snr must be positive and finite, got {snr!r}")
    return snr


class _AtomIntegrands:
    """Vectorised evaluation of the per-atom posterior log-ratio integrands."""

    def __init__(self, dist, sigma):
        x = dist.atoms
        self.n = x.size
        self.logp = np.log(dist.probs)
        self.D = (x[:, None] - x[None, :]) / sigma
        self.C = self.logp[None, :] - self.logp[:, None]
        # self terms never enter the sum
        self.C[np.diag_indices(self.n)] = -np.inf
        self.half_D2 = 0.5 * self.D * self.D

    def crossings(self, i):
        """Points where each other atom's posterior weight equals atom i's."""
        D = self.D[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (self.C[i] - self.half_D2[i]) / D
        u[i] = np.nan
        return u

    def log_values(self, atom_idx, u):
        """log of phi(u) * softplus(r_i(u)) for rows (atom_idx) of nodes u."""
        D = self.D[atom_idx][:, None, :]
        t = self.C[atom_idx][:, None, :] - D * u[:, :, None] - self.half_D2[atom_idx][:, None, :]
        m = np.max(t, axis=2)
        r = m + np.log(np.sum(np.exp(t - m[:, :, None]), axis=2))
        sp = np.logaddexp(0.0, r)
        with np.errstate(divide="ignore"):
            log_sp = np.where(r < -30.0, r, np.log(sp))
        return log_sp - 0.5 * u * u - _LOG_SQRT_2PI

    def panel_rules(self, atom_idx, a, b):
        """Kronrod estimate and |Kronrod - Gauss| error for each panel."""
        out_k = np.empty(a.size)
        out_e = np.empty(a.size)
        rows = max(1, _CHUNK_ELEMENTS // (15 * self.n))
        for s in range(0, a.size, rows):
            sl = slice(s, s + rows)
            mid = 0.5 * (a[sl] + b[sl])
            half = 0.5 * (b[sl] - a[sl])
            u = mid[:, None] + half[:, None] * _XK[None, :]
            f = np.exp(self.log_values(atom_idx[sl], u))
            k = half * (f @ _WK)
            g = half * (f @ _WG)
            out_k[sl] = k
            out_e[sl] = np.abs(k - g)
        return out_k, out_e


def _tail_bound(W, log_odds_plus):
    # one side: int_W^inf phi(u) (log 2 + c+ + u^2/2) du
    return (math.log(2.0) + log_odds_plus) * q_function(W) + 0.5 * r_function(W)


def _window_for(target, log_odds_plus, W0):
    """Smallest W >= W0 (to 0.01) whose two-sided tail bound is <= target."""
    W = W0
    if 2.0 * _tail_bound(W, log_odds_plus) <= target:
        return W
    hi = W + 1.0
    while 2.0 * _tail_bound(hi, log_odds_plus) > target:
        hi += max(1.0, hi)
        if hi > 1e4:
            raise PrecisionError("tail window does not converge")
    lo = W
    while hi - lo > 0.01:
        mid = 0.5 * (lo + hi)
        if 2.0 * _tail_bound(mid, log_odds_plus) > target:
            lo = mid
        else:
            hi = mid
    return hi


def _initial_breaks(ig, i, W_lo, W_hi):
    u = ig.crossings(i)
    pts = [W_lo, 0.0, W_hi]
    # geometric breaks keep a wide window from hiding the bump of phi at 0
    k = np.arange(0, int(math.log2(max(W_hi, -W_lo, 1.0))) + 1)
    pts.extend(2.0**k)
    pts.extend(-(2.0**k))
    for j in (i - 1, i + 1):
        if 0 <= j < ig.n and np.isfinite(u[j]):
            scale = min(1.0, 2.0 / abs(ig.D[i, j]))
            for off in (0.0, 1.0, -1.0, 4.0, -4.0, 16.0, -16.0):
                pts.append(u[j] + off * scale)
    # farther crossings sit where the integrand is already smooth and small
    near = u[max(0, i - 3): i + 4]
    pts.extend(near[np.isfinite(near)])
    pts = np.unique(np.clip(np.asarray(pts, dtype=float), W_lo, W_hi))
    return pts


def conditional_entropy(dist: DiscreteDistribution, snr, tol=1e-10) -> ChannelEval:
    """Equivocation ``H(X|Y)`` and related entropies at one SNR.

    Parameters
    ----------
    dist : DiscreteDistribution
        Input distribution.
    snr : float
        Signal-to-noise ratio; the noise standard deviation is ``1/sqrt(snr)``.
    tol : float, optional
        Target relative accuracy of ``H(X|Y)``, at least 1e-13.

    Returns
    -------
    ChannelEval

    Raises
    ------
    PrecisionError
        If the adaptive quadrature cannot reach ``tol``.
    """
    snr = _check_snr(snr)
    tol = float(tol)
    if not tol >= MIN_TOL:
        raise DomainError(f"tol must be at least {MIN_TOL}, got {tol!r}")
    sigma = 1.0 / math.sqrt(snr)
    H_X = entropy(dist)
    h_Z = 0.5 * math.log(2.0 * math.pi * math.e * sigma * sigma)
    n = len(dist)
    if n == 1:
        return ChannelEval(snr, sigma, 0.0, h_Z, 0.0, 0.0, 0.0)

    d_min = min_distance(dist)
    if sigma < d_min / 2.0:
        log_ub = -d_min**2 / (8.0 * sigma**2) + math.log(
            H_X + 1.5 + d_min / (2.0 * sigma * math.sqrt(2.0 * math.pi))
        )
        if log_ub < math.log(UNDERFLOW_FLOOR):
            return _underflow(snr, sigma, H_X, h_Z)

    ig = _AtomIntegrands(dist, sigma)
    p = dist.probs
    log_odds_plus = np.maximum(np.log1p(-np.minimum(p, 1.0 - 1e-16)) - ig.logp, 0.0)

    # first pass window from the nearest-crossing scale
    W = np.empty(n)
    base = 2.0 * math.log(1.0 / tol)
    for i in range(n):
        u = ig.crossings(i)
        near = [abs(u[j]) for j in (i - 1, i + 1) if 0 <= j < n and np.isfinite(u[j])]
        ub = min(near) if near else 0.0
        W[i] = math.sqrt(base + ub * ub) + 2.0

    atom_idx, a, b = [], [], []
    for i in range(n):
        pts = _initial_breaks(ig, i, -W[i], W[i])
        atom_idx.append(np.full(pts.size - 1, i))
        a.append(pts[:-1])
        b.append(pts[1:])
    atom_idx = np.concatenate(atom_idx)
    a = np.concatenate(a)
    b = np.concatenate(b)

    for _ in range(8):
        total, quad_err, atom_idx, a, b = _adapt(ig, p, atom_idx, a, b, 0.5 * tol)
        if total < UNDERFLOW_FLOOR:
            return _underflow(snr, sigma, H_X, h_Z)
        # grow windows until the certified tail fits in the remaining budget
        per_atom = 0.25 * tol * total / n
        grown = False
        new_idx, new_a, new_b = [], [], []
        for i in range(n):
            need = _window_for(per_atom / p[i], log_odds_plus[i], W[i])
            if need > W[i] + 1e-9:
                edges = np.linspace(W[i], need, 3)
                for lo_e, hi_e in zip(edges[:-1], edges[1:]):
                    new_idx += [i, i]
                    new_a += [lo_e, -hi_e]
                    new_b += [hi_e, -lo_e]
                W[i] = need
                grown = True
        if not grown:
            break
        atom_idx = np.concatenate([atom_idx, np.array(new_idx, dtype=int)])
        a = np.concatenate([a, np.array(new_a)])
        b = np.concatenate([b, np.array(new_b)])
    else:
        raise PrecisionError("tail window did not settle")

    tail = math.fsum(p[i] * 2.0 * float(_tail_bound(W[i], log_odds_plus[i])) for i in range(n))
    hxy = total
    rel = (quad_err + tail) / hxy
    if rel > tol:
        raise PrecisionError(f"certified relative error {rel:.3g} exceeds tol {tol:.3g}")
    hxy = min(hxy, H_X)
    I_XY = max(H_X - hxy, 0.0)
    return ChannelEval(
        snr=snr,
        sigma=sigma,
        H_X=H_X,
        h_Y=I_XY + h_Z,
        I_XY=I_XY,
        H_X_given_Y=hxy,
        rel_error_bound=rel,
        panels=int(a.size),
    )


def _adapt(ig, p, atom_idx, a, b, rel_tol):
    """Adaptive bisection until the weighted GK error is below rel_tol * total."""
    val, err = ig.panel_rules(atom_idx, a, b)
    done_val = []
    done_err = []
    while True:
        w_val = p[atom_idx] * val
        w_err = p[atom_idx] * err
        total = math.fsum(w_val) + math.fsum(done_val)
        err_total = math.fsum(w_err) + math.fsum(done_err)
        if total <= 0.0:
            return 0.0, 0.0, atom_idx, a, b
        budget = rel_tol * total
        if err_total <= budget:
            break
        if a.size + len(done_val) > _MAX_PANELS:
            raise PrecisionError("adaptive quadrature exceeded its panel budget")
        split = w_err > budget / max(a.size, 1)
        if not np.any(split):
            split = w_err >= np.max(w_err)
        mid = 0.5 * (a[split] + b[split])
        s_idx = atom_idx[split]
        keep = ~split
        # converged panels are frozen; only split ones are re-evaluated
        la, lb = a[split], b[split]
        n_idx = np.concatenate([s_idx, s_idx])
        n_a = np.concatenate([la, mid])
        n_b = np.concatenate([mid, lb])
        n_val, n_err = ig.panel_rules(n_idx, n_a, n_b)
        atom_idx = np.concatenate([atom_idx[keep], n_idx])
        a = np.concatenate([a[keep], n_a])
        b = np.concatenate([b[keep], n_b])
        val = np.concatenate([val[keep], n_val])
        err = np.concatenate([err[keep], n_err])
    return total, err_total, atom_idx, a, b


def _underflow(snr, sigma, H_X, h_Z):
    return ChannelEval(
        snr=snr,
        sigma=sigma,
        H_X=H_X,
        h_Y=H_X + h_Z,
        I_XY=H_X,
        H_X_given_Y=0.0,
        rel_error_bound=math.inf,
        underflow=True,
    )


def conditional_entropy_sweep(dist, snrs, tol=1e-10, workers=None):
    """:func:`conditional_entropy` over many SNRs, optionally in threads.

    Results come back in the order of ``snrs``.
    """
    snrs = [float(s) for s in snrs]
    if workers is None or workers <= 1 or len(snrs) < 2:
        return [conditional_entropy(dist, s, tol) for s in snrs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: conditional_entropy(dist, s, tol), snrs))


def output_entropy(dist: DiscreteDistribution, snr, epsrel=1e-11) -> float:
    """Differential entropy ``h(Y)`` by direct quadrature of ``-f log f``.

    An independent route for moderate SNR only: the result carries absolute
    error near machine precision, so ``H(X) + h(Z) - h(Y)`` is useless once
    ``H(X|Y)`` drops below about 1e-12.
    """
    snr = _check_snr(snr)
    sigma = 1.0 / math.sqrt(snr)
    x = dist.atoms
    logp = np.log(dist.probs)

    def neg_f_log_f(y):
        t = logp - 0.5 * ((y - x) / sigma) ** 2
        log_f = special.logsumexp(t) - _LOG_SQRT_2PI - math.log(sigma)
        return -math.exp(log_f) * log_f

    lo = x[0] - 40.0 * sigma
    hi = x[-1] + 40.0 * sigma
    pts = np.unique(np.concatenate([x, 0.5 * (x[1:] + x[:-1])]))
    edges = np.concatenate([[lo], pts, [hi]])
    parts = []
    for left, right in zip(edges[:-1], edges[1:]):
        if right <= left:
            continue
        val, _ = integrate.quad(neg_f_log_f, left, right, epsabs=0.0, epsrel=epsrel, limit=200)
        parts.append(val)
    return math.fsum(parts)


def conditional_entropy_mc(dist: DiscreteDistribution, snr, n, seed, chunk=1 << 16):
    """Monte Carlo estimate of ``H(X|Y)`` with its standard error.

    Draws ``(X, Z)`` pairs and averages the entropy of the posterior of ``X``
    given ``y = x + z``, computed in the log domain.  Deterministic given
    ``seed``.

    Returns
    -------
    (estimate, stderr) : tuple of float, nats
    """
    snr = _check_snr(snr)
    n = int(n)
    if n < 1000:
        raise DomainError("Monte Carlo needs at least 1000 samples")
    if len(dist) == 1:
        return 0.0, 0.0
    sigma = 1.0 / math.sqrt(snr)
    x = dist.atoms
    logp = np.log(dist.probs)
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0
    rng = np.random.default_rng(seed)
    sums, sq_sums = [], []
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        remaining -= m
        idx = np.minimum(np.searchsorted(cdf, rng.random(m), side="right"), x.size - 1)
        y = x[idx] + sigma * rng.standard_normal(m)
        t = logp[None, :] - 0.5 * ((y[:, None] - x[None, :]) / sigma) ** 2
        log_post = t - special.logsumexp(t, axis=1, keepdims=True)
        post = np.exp(log_post)
        ent = -np.sum(np.where(post > 0.0, post * log_post, 0.0), axis=1)
        sums.append(math.fsum(ent))
        sq_sums.append(math.fsum(ent * ent))
    mean = math.fsum(sums) / n
    var = max(math.fsum(sq_sums) / n - mean * mean, 0.0) * n / (n - 1)
    return mean, math.sqrt(var / n)


def hxy_upper_bound(dist: DiscreteDistribution, snr) -> float:
    """``exp(-d^2/(8 s^2)) [H(X) + 3/2 + d/(2 s sqrt(2 pi))]``, ``s = 1/sqrt(snr)``.

    Valid only while the noise standard deviation is below half the minimum
    distance ``d``.

    Raises
    ------
    PreconditionError
        If ``sigma >= d_min / 2``.
    """
    snr = _check_snr(snr)
    sigma = 1.0 / math.sqrt(snr)
    d = min_distance(dist)
    if not sigma < d / 2.0:
        raise PreconditionError(
            f"upper bound needs sigma < d_min/2 (sigma={sigma:.6g}, d_min={d:.6g})"
        )
    if math.isinf(d):
        return 0.0
    z = d / (2.0 * sigma)
    return math.exp(-0.5 * z * z) * (entropy(dist) + 1.5 + z / math.sqrt(2.0 * math.pi))


def _closest_pair(dist):
    """Index of the minimum-gap pair with the largest mass factor.

    Lattices tie at every gap; the tail pairs carry almost no mass, so the
    tie goes to the pair maximising ``p0 log(1 + p1/p0)``.
    """
    if len(dist) < 2:
        raise DomainError("the lower bound needs at least two atoms")
    gaps = np.diff(dist.atoms)
    tied = np.flatnonzero(gaps <= gaps.min() * (1.0 + 1e-12))
    p0, p1 = dist.probs[tied], dist.probs[tied + 1]
    return int(tied[np.argmax(p0 * np.log1p(p1 / p0))])


def hxy_lower_bound(dist: DiscreteDistribution, snr, delta) -> float:
    """Lower bound on ``H(X|Y)`` from the closest pair and a window ``delta``.

    With ``x0 < x1`` a consecutive pair at minimum gap ``D`` and ``s = 1/sqrt(snr)``:

        p0 log(1 + p1/p0) * phi((D + 2 delta) / (2 s)) * delta / s

    where ``phi`` is the standard normal density.
    """
    snr = _check_snr(snr)
    delta = float(delta)
    if not delta > 0.0:
        raise DomainError("delta must be positive")
    k = _closest_pair(dist)
    p0, p1 = dist.probs[k], dist.probs[k + 1]
    gap = dist.atoms[k + 1] - dist.atoms[k]
    sigma = 1.0 / math.sqrt(snr)
    z = (gap + 2.0 * delta) / (2.0 * sigma)
    return p0 * math.log1p(p1 / p0) * math.exp(-0.5 * z * z - _LOG_SQRT_2PI) * delta / sigma


def optimal_delta(dist: DiscreteDistribution, snr) -> float:
    """Window width maximising :func:`hxy_lower_bound`.

    Positive root of ``2 delta^2 + D delta - 2 sigma^2 = 0``.
    """
    snr = _check_snr(snr)
    k = _closest_pair(dist)
    gap = dist.atoms[k + 1] - dist.atoms[k]
    var = 1.0 / snr
    return 4.0 * var / (gap + math.sqrt(gap * gap + 16.0 * var))


def hxy_lower_bound_best(dist: DiscreteDistribution, snr, deltas=None):
    """Best :func:`hxy_lower_bound` over a grid of windows.

    The default grid spans three decades around :func:`optimal_delta` and
    includes it.

    Returns
    -------
    (bound, delta) : tuple of float
    """
    if deltas is None:
        d_star = optimal_delta(dist, snr)
        deltas = np.concatenate([d_star * np.geomspace(1e-2, 1e1, 31), [d_star]])
    best = (-math.inf, math.nan)
    for delta in np.asarray(deltas, dtype=float):
        value = hxy_lower_bound(dist, snr, delta)
        if value > best[0]:
            best = (value, float(delta))
    return best


def fit_exponent(dist: DiscreteDistribution, snr_grid, tol=1e-10, workers=None) -> ExponentFit:
    """Estimate the exponential decay rate of ``H(X|Y)`` in SNR.

    ``fitted_limit`` is the slope of ``log H(X|Y)`` between the two largest
    grid points, which cancels the polynomial prefactor to first order;
    ``predicted_limit`` is ``-d_min**2 / 8``.

    Raises
    ------
    PrecisionError
        If ``H(X|Y)`` underflows anywhere on the grid.
    """
    grid = np.asarray(snr_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 4:
        raise DomainError("snr grid needs at least four points")
    if np.any(np.diff(grid) <= 0.0) or grid[0] <= 0.0:
        raise DomainError("snr grid must be positive and strictly increasing")
    if len(dist) < 2:
        raise DomainError("a point mass has no decay exponent")
    evals = conditional_entropy_sweep(dist, grid, tol, workers)
    for ev in evals:
        if ev.underflow:
            raise PrecisionError(f"H(X|Y) underflows at snr={ev.snr:g}; lower the grid")
    hxy = np.array([ev.H_X_given_Y for ev in evals])
    logs = np.log(hxy)
    slope = (logs[-1] - logs[-2]) / (grid[-1] - grid[-2])
    d = min_distance(dist)
    return ExponentFit(
        snr_grid=tuple(grid.tolist()),
        scaled_log_values=tuple((logs / grid).tolist()),
        hxy_values=tuple(hxy.tolist()),
        fitted_limit=float(slope),
        predicted_limit=-d * d / 8.0,
    )
