import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entgauss.errors import ConvergenceError, DomainError
from entgauss.theta import log_theta, log_theta_mp, theta_sandwich


def series(lam, a=0.0, terms=60):
    j = np.arange(-terms, terms + 1, dtype=float) + a
    w = np.exp(-lam * j * j)
    s0 = math.fsum(w)
    s1 = math.fsum(j * j * w)
    s2 = math.fsum(j**4 * w)
    return math.log(s0), -s1 / s0, s2 / s0 - (s1 / s0) ** 2


def test_value_at_pi_matches_twenty_term_sum():
    j = np.arange(1, 21, dtype=float)
    oracle = math.log1p(2.0 * math.fsum(np.exp(-math.pi * j * j)))
    t = log_theta(math.pi)
    assert abs(t.L - oracle) < 1e-15
    # the quoted 0.082977 is off in the fifth digit; the series gives 0.0829015
    assert t.L == pytest.approx(0.0829015, abs=1e-7)


def test_infinite_lambda_single_term():
    t = log_theta(math.inf)
    assert t.L == 0.0 and t.dL == 0.0
    big = log_theta(500.0)
    assert 0.0 <= big.L < 1e-200
    assert big.dL <= 0.0


def test_poisson_identity_at_one():
    lhs = series(1.0)[0]
    rhs = 0.5 * math.log(math.pi) + series(math.pi**2)[0]
    assert abs(math.expm1(lhs - rhs)) < 1e-12
    assert abs(math.expm1(log_theta(1.0).L - rhs)) < 1e-12


@pytest.mark.parametrize("lam", [0.2, 0.9, 2.0, 3.0, 3.2, 5.0, 12.0])
@pytest.mark.parametrize("a", [0.0, 0.5, 0.25])
def test_both_branches_match_direct_series(lam, a):
    L, dL, d2L = series(lam, a, terms=80)
    t = log_theta(lam, a)
    assert t.L == pytest.approx(L, abs=1e-12)
    assert t.dL == pytest.approx(dL, rel=1e-12)
    assert t.d2L == pytest.approx(d2L, rel=1e-11)


def test_modular_branch_below_pi():
    # the term counts tell the branches apart: the dual series needs very few terms at small lambda
    assert log_theta(0.01).truncation_terms < 10
    assert log_theta(math.pi).truncation_terms < 20


def _central(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


@pytest.mark.parametrize("lam", [1e-3, 0.01, 0.05, 1.0, 3.1, 3.2, 10.0, 50.0])
def test_derivative_matches_finite_difference(lam):
    L = lambda x: log_theta(x).L  # noqa: E731
    dL = lambda x: log_theta(x).dL  # noqa: E731
    if lam >= 0.05:
        fd = _central(L, lam, 1e-5)
    else:
        # third derivative ~ -1/lam^3 swamps a fixed 1e-5 step; Richardson on a relative step
        h = 1e-3 * lam
        fd = (4 * _central(L, lam, h / 2) - _central(L, lam, h)) / 3
    assert log_theta(lam).dL == pytest.approx(fd, abs=1e-6)
    h = 1e-4 * lam
    fd2 = (4 * _central(dL, lam, h / 2) - _central(dL, lam, h)) / 3
    assert log_theta(lam).d2L == pytest.approx(fd2, rel=1e-6)


def test_convexity_second_difference():
    for lo in (0.01, 1.0, 3.0, 3.1, 10.0):
        grid = lo + 1e-3 * np.arange(200)
        L = np.array([log_theta(x).L for x in grid])
        assert np.all(L[:-2] - 2 * L[1:-1] + L[2:] >= -1e-6)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 200.0), st.sampled_from([0.0, 0.5, 0.3]))
def test_sign_invariants(lam, a):
    t = log_theta(lam, a)
    assert t.dL < 0
    assert t.d2L >= 0
    assert t.abs_error_bound <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 60.0))
def test_shift_dominance(lam):
    L0 = log_theta(lam, 0.0).L
    Lh = log_theta(lam, 0.5).L
    if L0 - Lh > 1e-13:
        return
    # the gap falls below double precision for small lambda; settle it exactly
    dps = int(math.pi**2 / lam / math.log(10)) + 30
    a0 = log_theta_mp(lam, 0, dps)[0]
    ah = log_theta_mp(lam, mpmath.mpf(1) / 2, dps)[0]
    assert a0 > ah


def test_mp_agrees_with_float():
    for lam in (0.1, 2.0, 7.0):
        for a in (0.0, 0.5):
            m = log_theta_mp(lam, mpmath.mpf(a), 40)
            t = log_theta(lam, a)
            assert float(m[0]) == pytest.approx(t.L, abs=1e-15)
            assert float(m[1]) == pytest.approx(t.dL, rel=1e-14)


def test_sandwich_examples():
    lo, hi = theta_sandwich(10.0, "large")
    assert lo == pytest.approx(1 + 2 * math.exp(-10))
    assert hi == pytest.approx(1 + 2 * math.exp(-10) + math.sqrt(math.pi / 10) * math.exp(-10))
    lo, hi = theta_sandwich(0.1, "small")
    assert lo == pytest.approx(math.sqrt(10 * math.pi) * (1 + 2 * math.exp(-10 * math.pi**2)))
    assert hi == pytest.approx(lo + math.exp(-10 * math.pi**2))


@pytest.mark.parametrize("lam", np.geomspace(0.02, 80, 25))
@pytest.mark.parametrize("regime", ["small", "large"])
def test_sandwich_contains_value(lam, regime):
    lo, hi = theta_sandwich(lam, regime)
    val = math.exp(log_theta(lam).L)
    assert lo <= hi
    assert lo * (1 - 1e-14) <= val <= hi * (1 + 1e-14)


def test_domain_errors():
    for bad in (0.0, -1.0, math.nan):
        with pytest.raises(DomainError):
            log_theta(bad)
    with pytest.raises(DomainError):
        log_theta(1.0, 1.0)
    with pytest.raises(DomainError):
        log_theta(1.0, -0.1)
    with pytest.raises(DomainError):
        log_theta(1.0, tol=0.0)
    with pytest.raises(DomainError):
        theta_sandwich(0.0, "small")
    with pytest.raises(DomainError):
        theta_sandwich(1.0, "medium")


def test_term_cap(monkeypatch):
    with pytest.raises(ConvergenceError):
        log_theta(4.0, 0.0, tol=1e-300, max_terms=3)
    monkeypatch.setenv("ENTGAUSS_MAX_TERMS", "3")
    with pytest.raises(ConvergenceError):
        log_theta(4.0)
    monkeypatch.setenv("ENTGAUSS_MAX_TERMS", "zero")
    with pytest.raises(DomainError):
        log_theta(4.0)
