import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import lambertw
from scipy.stats import norm

from entgauss.distributions import DiscreteGaussianSpec, entropy, materialize, moments
from entgauss.errors import BracketError, DomainError
from entgauss.solver import (
    BITS,
    d_h_approx,
    from_nats,
    gap_exponent,
    gap_exponent_approx,
    lambda_h_approx,
    lambert_w_minus1,
    solve,
    solve_shifted,
    tangent_entropy,
    threshold_entropy,
    to_nats,
)
from entgauss.theta import log_theta


def test_threshold_value():
    thr = threshold_entropy()
    assert thr == tangent_entropy(math.pi)
    assert from_nats(thr, "bits") == pytest.approx(0.480275, abs=1e-6)
    # the quoted 0.3337 nats is slightly off; the series gives 0.332902
    assert thr == pytest.approx(0.332902, abs=1e-6)


def test_threshold_solves_to_pi():
    res = solve(threshold_entropy())
    assert res.lambda_h == pytest.approx(math.pi, rel=1e-10)
    assert res.regime == "above_threshold"
    assert solve(threshold_entropy() * (1 - 1e-9)).regime == "below_threshold"


@pytest.mark.parametrize(
    "h_bits,d_h",
    [(1e-4, 447.48), (6.0, 0.064), (0.5, 3.45093), (1.0, 2.10013), (5.0, 0.129148), (10.0, 0.0040359)],
)
def test_reference_values(h_bits, d_h):
    # 447.48 and 0.064 are quoted at their printed precision
    rel = {1e-4: 5e-3, 6.0: 1e-2}.get(h_bits, 1e-5)
    assert solve(h_bits * BITS).d_h == pytest.approx(d_h, rel=rel)


@settings(max_examples=80, deadline=None)
@given(st.floats(1e-12, 50.0))
def test_solve_invariants(h):
    res = solve(h)
    assert abs(res.entropy_residual) <= 1e-10 * max(1.0, h)
    assert abs(res.variance_check - 1.0) <= 1e-8
    t = log_theta(res.lambda_h)
    assert res.d_h == pytest.approx(1.0 / math.sqrt(-t.dL), rel=1e-14)
    assert (res.regime == "below_threshold") == (h < threshold_entropy())


def test_solve_fast():
    t0 = time.perf_counter()
    for h in np.geomspace(1e-8, 20, 50):
        solve(h)
    assert (time.perf_counter() - t0) / 50 < 0.01


def test_domain_errors():
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(DomainError):
            solve(bad)
    with pytest.raises(DomainError):
        to_nats(1.0, "hartleys")


def test_tangent_entropy_decreasing():
    lam = np.geomspace(1e-3, 60, 400)
    g = np.array([tangent_entropy(x) for x in lam])
    assert np.all(np.diff(g) < 0)


def test_dh_decreasing():
    d = [solve(h).d_h for h in np.geomspace(1e-8, 20, 100)]
    assert np.all(np.diff(d) < 0)


def test_round_trip():
    for h in np.geomspace(1e-6, 10.0, 20):
        res = solve(h)
        dist = materialize(DiscreteGaussianSpec(res.d_h, res.lambda_h))
        assert entropy(dist) == pytest.approx(h, rel=1e-8)
        assert moments(dist)[1] == pytest.approx(1.0, abs=1e-8)


def test_lambert_branch_point_and_reference():
    assert lambert_w_minus1(-1.0 / math.e) == pytest.approx(-1.0, abs=1e-7)
    # bisection oracle for y = -0.1
    lo, hi = -20.0, -1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        # w e^w decreases on the lower branch
        if mid * math.exp(mid) > -0.1:
            lo = mid
        else:
            hi = mid
    assert lambert_w_minus1(-0.1) == pytest.approx(0.5 * (lo + hi), rel=1e-13)
    assert lambert_w_minus1(-0.1) == pytest.approx(-3.577152, abs=1e-6)


def test_lambert_round_trip():
    for y in -np.geomspace(1e-300, 1 / math.e * (1 - 1e-12), 100):
        w = lambert_w_minus1(y)
        assert w <= -1.0
        assert w * math.exp(w) == pytest.approx(y, rel=1e-12)
        if y > -0.3:
            # scipy loses digits close to the branch point
            assert w == pytest.approx(lambertw(y, -1).real, rel=1e-9)


def test_lambert_domain():
    for bad in (0.0, 0.1, -0.5):
        with pytest.raises(DomainError):
            lambert_w_minus1(bad)


def test_approximations():
    h = 6 * BITS
    assert d_h_approx(h, "large") == pytest.approx(math.sqrt(2 * math.pi * math.e) * math.exp(-h))
    assert d_h_approx(h, "large") == pytest.approx(0.0646, abs=1e-4)
    assert d_h_approx(h, "large") == pytest.approx(solve(h).d_h, rel=0.02)
    small = d_h_approx(1e-4 * BITS, "small")
    assert small == pytest.approx(384.9, abs=0.1)
    assert small == pytest.approx(solve(1e-4 * BITS).d_h, rel=0.15)
    assert d_h_approx(1e4, "large") < 1e-300
    assert math.isnan(d_h_approx(3.0, "small"))
    with pytest.raises(DomainError):
        d_h_approx(1.0, "medium")


def test_lambda_approx():
    assert lambda_h_approx(2.0, "large") == pytest.approx(math.pi * math.e * math.exp(-4.0))
    h = 1e-6
    lam = lambda_h_approx(h, "small")
    assert 2 * lam * math.exp(-lam) == pytest.approx(h, rel=1e-12)


def test_gap_exponents():
    h = 6 * BITS
    assert gap_exponent(h) == pytest.approx(0.064**2 / 8, rel=0.02)
    assert gap_exponent_approx(h, "large") == pytest.approx(5.2e-4, rel=0.01)
    assert gap_exponent_approx(h, "large") == pytest.approx(gap_exponent(h), rel=0.05)
    hs = 1e-4 * BITS
    ratio = gap_exponent_approx(hs, "small") / gap_exponent(hs)
    assert 0.6 <= ratio <= 1.0
    for hh in (1e-5, 0.1, 2.0, 8.0):
        for regime in ("small", "large"):
            a = gap_exponent_approx(hh, regime)
            b = d_h_approx(hh, regime) ** 2 / 8
            assert (math.isnan(a) and math.isnan(b)) or a == pytest.approx(b, rel=1e-14)
    g = [gap_exponent(x) for x in np.geomspace(1e-4, 10, 50)]
    assert np.all(np.diff(g) < 0)
    assert gap_exponent(threshold_entropy()) == pytest.approx(4 * math.pi / 8, rel=1e-9)


def test_small_regime_convergence():
    errs = [abs(d_h_approx(h * BITS, "small") / solve(h * BITS).d_h - 1) for h in (1e-3, 1e-4, 1e-6, 1e-8)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_weak_convergence_to_normal():
    for h_bits in (10.0, 12.0):
        res = solve(h_bits * BITS)
        d = materialize(DiscreteGaussianSpec(res.d_h, res.lambda_h))
        cdf = np.cumsum(d.probs)[:-1]
        mids = 0.5 * (d.atoms[1:] + d.atoms[:-1])
        assert np.max(np.abs(cdf - norm.cdf(mids))) < 0.01


def test_shifted_solver():
    lam, t = solve_shifted(2.0, 0.5)
    assert t.entropy == pytest.approx(2.0, abs=1e-12)
    assert solve_shifted(1.0, 0.0)[0] == pytest.approx(solve(1.0).lambda_h, rel=1e-12)
    # half-integer lattice entropy never drops to log 2
    with pytest.raises(BracketError):
        solve_shifted(0.5, 0.5)
