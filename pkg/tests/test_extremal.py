import math

import mpmath
import numpy as np
import pytest

from entgauss.distributions import DiscreteDistribution, entropy, min_distance, moments
from entgauss.errors import DomainError
from entgauss.extremal import (
    HALF_SHIFT_LIMIT_VARIANCE,
    aligned_total_variation,
    dmin_search,
    duality_check,
    equal_spacing_translate,
    shift_comparison,
    tangent_lemma_check,
    variance_gap,
)
from entgauss.solver import BITS, solve, threshold_entropy
from entgauss.theta import log_theta, log_theta_mp


def test_two_atoms_at_log2():
    # at h = log 2 two atoms must be equiprobable at +-1, so d_min = 2
    rep = dmin_search(math.log(2.0), 2, 500, seed=0)
    assert rep.best_dmin_found == pytest.approx(2.0, rel=1e-6)
    assert rep.d_h_reference == pytest.approx(2.10013, rel=1e-4)
    assert rep.best_dmin_found <= rep.d_h_reference


def test_candidate_constraints():
    rep = dmin_search(0.5, 5, 2048, seed=1)
    c = rep.best_candidate
    assert entropy(c) == pytest.approx(0.5, abs=1e-9)
    mean, m2 = moments(c)
    assert abs(mean) < 1e-9
    assert m2 == pytest.approx(1.0, abs=1e-9)
    assert min_distance(c) == pytest.approx(rep.best_dmin_found, rel=1e-12)
    assert rep.best_dmin_found <= rep.d_h_reference * (1 + 1e-3)


def test_zero_trials_and_domain():
    rep = dmin_search(0.5, 4, 0, seed=0)
    assert rep.trials == 0 and rep.best_candidate is None
    assert rep.to_dict()["best_candidate"] is None
    with pytest.raises(DomainError):
        dmin_search(math.log(4.0) + 0.01, 4, 10, seed=0)
    with pytest.raises(DomainError):
        dmin_search(0.5, 1, 10, seed=0)
    with pytest.raises(DomainError):
        dmin_search(0.5, 4, -1, seed=0)


def test_reproducible_across_workers():
    a = dmin_search(0.4, 6, 4096, seed=42)
    b = dmin_search(0.4, 6, 4096, seed=42, workers=2)
    assert a.best_dmin_found == b.best_dmin_found
    assert np.array_equal(a.best_candidate.atoms, b.best_candidate.atoms)
    c = dmin_search(0.4, 6, 4096, seed=43)
    assert c.best_dmin_found != a.best_dmin_found


def test_equal_spacing_does_not_raise_second_moment():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(2, 10))
        atoms = np.cumsum(rng.uniform(0.05, 2.0, n)) - rng.uniform(0, 5)
        d = DiscreteDistribution.from_weights(atoms, rng.random(n) + 0.01)
        e = equal_spacing_translate(d)
        assert min_distance(e) == pytest.approx(min_distance(d), rel=1e-12)
        assert entropy(e) == entropy(d)
        assert moments(e)[1] <= moments(d)[1] * (1 + 1e-12) + 1e-15
        assert np.all(np.abs(e.atoms) <= np.abs(d.atoms) + 1e-12)


def test_aligned_tv():
    d = DiscreteDistribution([-1.0, 0.0, 1.0], [0.25, 0.5, 0.25])
    assert aligned_total_variation(d.shifted(0.3), d, 1.0) == 0.0
    other = DiscreteDistribution([-1.0, 0.0, 1.0], [0.2, 0.6, 0.2])
    assert aligned_total_variation(other, d, 1.0) == pytest.approx(0.1)


@pytest.mark.parametrize("h", [1e-3, 0.1, 0.5, 2.0, 6.0])
def test_duality(h):
    var, product = duality_check(h)
    assert product == pytest.approx(1.0, abs=1e-10)


def test_variance_at_threshold_and_large_h():
    var, _ = duality_check(threshold_entropy())
    assert var == pytest.approx(1 / (4 * math.pi), rel=1e-9)
    var6, _ = duality_check(6 * BITS)
    assert var6 == pytest.approx(1 / 0.064574**2, rel=1e-4)


def test_shift_gap_shrinks():
    gaps = [variance_gap(h * BITS)[1] for h in (1.2, 2.0, 3.0, 4.0)]
    assert all(math.isfinite(g) for g in gaps)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_shift_below_log2_uses_limit():
    var0, var_half = shift_comparison(0.3)
    assert var_half == HALF_SHIFT_LIMIT_VARIANCE
    assert var0 < var_half


def test_tangent_slopes():
    for h_bits in (0.3, 1.5, 4.0):
        h = h_bits * BITS
        var0, var_half = shift_comparison(h)
        slope_f, slope_g = tangent_lemma_check(h)
        assert mpmath.fneg(slope_f, exact=True) == var0
        assert mpmath.fneg(slope_g, exact=True) == var_half
        assert slope_f > slope_g
        # the tangent at lam_h meets the y-axis at h
        lam = solve(h).lambda_h
        t = log_theta(lam)
        assert t.L - lam * t.dL == pytest.approx(h, rel=1e-10)


def test_half_shift_below_integer_lattice():
    for lo, hi in ((0.05, 1.0), (1.0, 3.0), (3.0, 40.0)):
        for lam in np.linspace(lo, hi, 30):
            L0 = log_theta(lam, 0.0).L
            Lh = log_theta(lam, 0.5).L
            if L0 - Lh > 1e-12:
                continue
            dps = int(math.pi**2 / lam / math.log(10)) + 30
            assert log_theta_mp(lam, 0, dps)[0] > log_theta_mp(lam, mpmath.mpf(1) / 2, dps)[0]
