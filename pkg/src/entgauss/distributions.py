"""Finite discrete distributions on the real line and the discrete Gaussian."""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "DiscreteDistribution",
    "DiscreteGaussianSpec",
    "materialize",
    "entropy",
    "moments",
    "min_distance",
    "sample",
    "total_variation",
    "truncation_index",
    "load_constellation",
    "parse_constellation",
]

_PROB_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Finitely supported distribution with strictly increasing atoms.

    Parameters
    ----------
    atoms : array_like
        Strictly increasing support points.
    probs : array_like
        Positive probabilities summing to one within 1e-12.
    lattice_step : float, optional
        Exact spacing when the atoms lie on a uniform grid.  Float rounding
        makes ``np.diff(atoms)`` differ from it in the last bits, so
        :func:`min_distance` reports this value instead.
    """

    atoms: np.ndarray
    probs: np.ndarray
    lattice_step: float | None = None

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float).reshape(-1)
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if atoms.size == 0:
            raise DomainError("a distribution needs at least one atom")
        if atoms.shape != probs.shape:
            raise DomainError("atoms and probs must have the same length")
        if not (np.all(np.isfinite(atoms)) and np.all(np.isfinite(probs))):
            raise DomainError("atoms and probs must be finite")
        if np.any(np.diff(atoms) <= 0.0):
            raise DomainError("atoms must be strictly increasing")
        if np.any(probs <= 0.0):
            raise DomainError("probabilities must be positive")
        total = math.fsum(probs)
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise DomainError(f"probabilities sum to {total!r}, not 1")
        if self.lattice_step is not None:
            step = float(self.lattice_step)
            if atoms.size > 1 and not np.allclose(np.diff(atoms), step, rtol=1e-9, atol=0.0):
                raise DomainError("atoms are not uniformly spaced by lattice_step")
            object.__setattr__(self, "lattice_step", step)
        atoms.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_weights(cls, atoms, weights):
        """Build from nonnegative weights, sorting atoms and normalising.

        Zero-weight atoms are dropped.
        """
        atoms = np.asarray(atoms, dtype=float).reshape(-1)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        order = np.argsort(atoms, kind="stable")
        atoms, weights = atoms[order], weights[order]
        keep = weights > 0.0
        atoms, weights = atoms[keep], weights[keep]
        return cls(atoms, weights / math.fsum(weights))

    def __len__(self):
        return self.atoms.size

    def __eq__(self, other):
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return np.array_equal(self.atoms, other.atoms) and np.array_equal(self.probs, other.probs)

    __hash__ = None

    def shifted(self, offset):
        return DiscreteDistribution(self.atoms + offset, self.probs, self.lattice_step)

    def scaled(self, factor):
        if not factor > 0:
            raise DomainError("scale factor must be positive")
        step = None if self.lattice_step is None else self.lattice_step * factor
        return DiscreteDistribution(self.atoms * factor, self.probs, step)

    def to_dict(self):
        return {"atoms": self.atoms.tolist(), "probs": self.probs.tolist()}


@dataclass(frozen=True)
class DiscreteGaussianSpec:
    """Discrete Gaussian ``N^beta(lam)`` before truncation.

    Mass at ``beta * i`` is proportional to ``exp(-lam * i**2)``.  The
    materialised support keeps ``|i| <= J`` with discarded mass below
    ``tail_eps``.
    """

    beta: float
    lam: float
    tail_eps: float = 1e-16

    def __post_init__(self):
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be positive and finite, got {self.beta!r}")
        if not self.lam > 0.0:
            raise DomainError(f"lambda must be positive, got {self.lam!r}")
        if not 0.0 < self.tail_eps < 1e-3:
            raise DomainError(f"tail_eps must lie in (0, 1e-3), got {self.tail_eps!r}")


def _log_side_tail(lam, n):
    # log of a bound on sum_{i >= n} exp(-lam i^2), n >= 1
    return -lam * n * n + math.log1p(1.0 / (2.0 * lam * n))


def truncation_index(lam, tail_eps):
    """Smallest ``J`` whose discarded two-sided mass is below ``tail_eps``.

    The discarded mass ``sum_{|i| > J} exp(-lam i^2)`` is bounded by the
    same integral majorant as the theta series, and compared against the
    kept mass (which is at least one).
    """
    if math.isinf(lam):
        return 0
    log_eps = math.log(tail_eps)
    # kept mass >= 1, so requiring tail <= tail_eps is sufficient
    if math.log(2.0) + _log_side_tail(lam, 1) < log_eps:
        return 0
    # bracket from the Gaussian estimate, then refine upwards
    J = max(0, int(math.sqrt(max(-log_eps, 0.0) / lam)) - 1)
    while math.log(2.0) + _log_side_tail(lam, J + 1) >= log_eps:
        J += 1
    while J > 0 and math.log(2.0) + _log_side_tail(lam, J) < log_eps:
        J -= 1
    return J


def materialize(spec: DiscreteGaussianSpec) -> DiscreteDistribution:
    """Truncate and renormalise the discrete Gaussian described by ``spec``.

    The result is exactly symmetric: the probabilities at ``+beta i`` and
    ``-beta i`` are the same float.
    """
    if math.isinf(spec.lam):
        return DiscreteDistribution([0.0], [1.0], lattice_step=spec.beta)
    J = truncation_index(spec.lam, spec.tail_eps)
    i = np.arange(0, J + 1, dtype=float)
    half = np.exp(-spec.lam * i * i)
    total = 1.0 + 2.0 * math.fsum(half[1:])
    half = half / total
    probs = np.concatenate([half[:0:-1], half])
    atoms = spec.beta * np.concatenate([-i[:0:-1], i])
    return DiscreteDistribution(atoms, probs, lattice_step=spec.beta)


def entropy(dist: DiscreteDistribution) -> float:
    """Shannon entropy in nats, summed in ascending order of probability."""
    p = np.sort(dist.probs)
    return math.fsum(-p * np.log(p))


def moments(dist: DiscreteDistribution):
    """Mean and second moment about zero.

    Returns
    -------
    (mean, second_moment) : tuple of float
    """
    x, p = dist.atoms, dist.probs
    return math.fsum(p * x), math.fsum(p * x * x)


def min_distance(dist: DiscreteDistribution) -> float:
    """Smallest gap between consecutive atoms; ``inf`` for a point mass."""
    if len(dist) < 2:
        return math.inf
    if dist.lattice_step is not None:
        return dist.lattice_step
    return float(np.min(np.diff(dist.atoms)))


def sample(dist: DiscreteDistribution, n, seed) -> np.ndarray:
    """Draw ``n`` i.i.d. values by inverse CDF, reproducible from ``seed``."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be at least 1")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return dist.atoms[np.minimum(idx, len(dist) - 1)]


def total_variation(p_atoms, p_probs, q_atoms, q_probs, atol=1e-9):
    """Total-variation distance between two pmfs, matching atoms within ``atol``."""
    atoms = np.concatenate([np.asarray(p_atoms, float), np.asarray(q_atoms, float)])
    order = np.argsort(atoms, kind="stable")
    labels = np.empty(atoms.size, dtype=int)
    current = -1
    last = -math.inf
    for k in order:
        if atoms[k] - last > atol:
            current += 1
            last = atoms[k]
        labels[k] = current
    n_p = len(p_atoms)
    mass = np.zeros(current + 1)
    np.add.at(mass, labels[:n_p], np.asarray(p_probs, float))
    np.add.at(mass, labels[n_p:], -np.asarray(q_probs, float))
    return 0.5 * float(np.abs(mass).sum())


_DGAUSS = re.compile(r"^dgauss:h=([^a-z]+)(bits|nats)?$", re.IGNORECASE)


def parse_constellation(text: str) -> DiscreteDistribution:
    """Parse a constellation document.

    Accepts either a JSON object ``{"atoms": [...], "probs": [...]}`` or the
    shorthand ``"dgauss:h=<value><bits|nats>"`` (bits when the unit is
    omitted), which materialises the capacity-achieving discrete Gaussian.
    """
    text = text.strip()
    m = _DGAUSS.match(text)
    if m:
        from .solver import solve, to_nats

        try:
            value = float(m.group(1))
        except ValueError as exc:
            raise DomainError(f"bad entropy value in {text!r}") from exc
        units = (m.group(2) or "bits").lower()
        res = solve(to_nats(value, units))
        return materialize(DiscreteGaussianSpec(res.d_h, res.lambda_h))
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"not a constellation document: {exc}") from exc
    if not isinstance(doc, dict) or "atoms" not in doc or "probs" not in doc:
        raise DomainError('constellation must have "atoms" and "probs"')
    return DiscreteDistribution(doc["atoms"], doc["probs"])


def load_constellation(source: str) -> DiscreteDistribution:
    """Load from a ``dgauss:`` shorthand, a path, or an inline JSON string."""
    if source.lower().startswith("dgauss:"):
        return parse_constellation(source)
    if os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            return parse_constellation(fh.read())
    if source.lstrip().startswith("{"):
        return parse_constellation(source)
    raise DomainError(f"constellation file not found: {source!r}")
