import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entgauss.distributions import (
    DiscreteDistribution,
    DiscreteGaussianSpec,
    entropy,
    load_constellation,
    materialize,
    min_distance,
    moments,
    parse_constellation,
    sample,
    total_variation,
    truncation_index,
)
from entgauss.errors import DomainError
from entgauss.solver import BITS, solve
from entgauss.theta import log_theta


def test_validation():
    with pytest.raises(DomainError):
        DiscreteDistribution([], [])
    with pytest.raises(DomainError):
        DiscreteDistribution([0.0, 0.0], [0.5, 0.5])
    with pytest.raises(DomainError):
        DiscreteDistribution([1.0, 0.0], [0.5, 0.5])
    with pytest.raises(DomainError):
        DiscreteDistribution([0.0, 1.0], [1.0, 0.0])
    with pytest.raises(DomainError):
        DiscreteDistribution([0.0, 1.0], [0.5, 0.6])
    with pytest.raises(DomainError):
        DiscreteDistribution([0.0, 1.0], [0.5])
    with pytest.raises(DomainError):
        DiscreteDistribution([0.0, math.inf], [0.5, 0.5])
    # within the 1e-12 normalisation tolerance
    DiscreteDistribution([0.0, 1.0], [0.5, 0.5 + 5e-13])


def test_immutable_arrays():
    d = DiscreteDistribution([0.0, 1.0], [0.25, 0.75])
    with pytest.raises(ValueError):
        d.atoms[0] = 3.0


def test_from_weights_sorts_and_drops_zeros():
    d = DiscreteDistribution.from_weights([2.0, -1.0, 0.5], [1.0, 3.0, 0.0])
    assert d.atoms.tolist() == [-1.0, 2.0]
    assert d.probs.tolist() == [0.75, 0.25]


def test_spec_validation():
    for kwargs in ({"beta": 0.0, "lam": 1.0}, {"beta": 1.0, "lam": 0.0}, {"beta": 1.0, "lam": 1.0, "tail_eps": 1e-3}):
        with pytest.raises(DomainError):
            DiscreteGaussianSpec(**kwargs)


def test_infinite_lambda_point_mass():
    d = materialize(DiscreteGaussianSpec(1.0, math.inf))
    assert d.atoms.tolist() == [0.0] and d.probs.tolist() == [1.0]
    assert min_distance(d) == math.inf
    assert entropy(d) == 0.0


def test_p0_at_pi():
    d = materialize(DiscreteGaussianSpec(1.0, math.pi))
    j = np.arange(1, 30, dtype=float)
    oracle = 1.0 / (1.0 + 2.0 * math.fsum(np.exp(-math.pi * j * j)))
    p0 = d.probs[len(d) // 2]
    assert p0 == pytest.approx(oracle, rel=1e-14)
    # 0.92038 in the quoted example is a rounding slip; the series gives 0.920442
    assert p0 == pytest.approx(0.920442, abs=1e-6)


def test_six_bit_spacing():
    res = solve(6 * BITS)
    d = materialize(DiscreteGaussianSpec(res.d_h, res.lambda_h))
    assert min_distance(d) == res.d_h
    assert min_distance(d) == pytest.approx(0.064, rel=1e-2)


@pytest.mark.parametrize("beta,lam", [(1.0, 0.05), (0.3, 1.0), (2.0, math.pi), (1.0, 9.0)])
def test_closed_forms(beta, lam):
    d = materialize(DiscreteGaussianSpec(beta, lam, tail_eps=1e-16))
    t = log_theta(lam)
    assert entropy(d) == pytest.approx(t.entropy, rel=1e-8)
    mean, m2 = moments(d)
    assert abs(mean) < 1e-15 * max(1.0, beta * len(d))
    assert m2 == pytest.approx(-beta**2 * t.dL, rel=1e-8)
    assert min_distance(d) == beta


def test_truncated_mass_below_budget():
    for lam in (0.01, 0.3, 2.0):
        for eps in (1e-6, 1e-10, 1e-16):
            J = truncation_index(lam, eps)
            j = np.arange(J + 1, J + 4000, dtype=float)
            tail = 2.0 * math.fsum(np.exp(-lam * j * j))
            assert tail < eps
            if J > 0:
                j = np.arange(J, J + 4000, dtype=float)
                assert 2.0 * math.fsum(np.exp(-lam * j * j)) >= eps * 0.5


def test_entropy_tolerance_with_loose_tail():
    eps = 1e-6
    lam = 0.2
    d = materialize(DiscreteGaussianSpec(1.0, lam, tail_eps=eps))
    assert abs(entropy(d) - log_theta(lam).entropy) <= 10 * eps * (1 + abs(math.log(eps)))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(1e-3, 20.0))
def test_materialize_symmetric(beta, lam):
    d = materialize(DiscreteGaussianSpec(beta, lam))
    assert np.array_equal(d.probs, d.probs[::-1])
    assert np.array_equal(d.atoms, -d.atoms[::-1])
    assert min_distance(d) == beta


def test_simple_entropies_and_moments():
    assert entropy(DiscreteDistribution([3.0], [1.0])) == 0.0
    fair = DiscreteDistribution([-1.0, 1.0], [0.5, 0.5])
    assert entropy(fair) == pytest.approx(math.log(2), rel=1e-15)
    assert moments(fair) == (0.0, 1.0)
    assert min_distance(fair) == 2.0
    assert min_distance(DiscreteDistribution([0.0, 0.5, 2.0], [0.2, 0.3, 0.5])) == 0.5


def test_shift_and_scale():
    d = DiscreteDistribution([0.0, 1.0, 3.0], [0.2, 0.3, 0.5])
    assert np.allclose(d.shifted(2.0).atoms, [2.0, 3.0, 5.0])
    assert min_distance(d.scaled(3.0)) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        d.scaled(-1.0)


def test_sampling():
    assert np.all(sample(DiscreteDistribution([4.0], [1.0]), 100, 0) == 4.0)
    fair = DiscreteDistribution([-1.0, 1.0], [0.5, 0.5])
    n = 10**6
    x = sample(fair, n, seed=11)
    assert abs(x.mean()) < 4 / math.sqrt(n)
    assert np.array_equal(sample(fair, 1000, seed=3), sample(fair, 1000, seed=3))
    with pytest.raises(DomainError):
        sample(fair, 0, 1)


@pytest.mark.parametrize("seed", range(5))
def test_sample_pmf_concentration(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 10))
    d = DiscreteDistribution.from_weights(np.arange(k, dtype=float), rng.random(k) + 0.01)
    n = 20000
    x = sample(d, n, seed)
    vals, counts = np.unique(x, return_counts=True)
    tv = total_variation(vals, counts / n, d.atoms, d.probs)
    assert tv < 5 * math.sqrt(k / n)


def test_total_variation():
    assert total_variation([0, 1], [0.5, 0.5], [0, 1], [0.5, 0.5]) == 0.0
    assert total_variation([0], [1.0], [1], [1.0]) == 1.0
    assert total_variation([0, 1], [0.5, 0.5], [1e-12, 1], [0.25, 0.75]) == pytest.approx(0.25)


def test_constellation_parsing(tmp_path):
    doc = {"atoms": [-1, 1], "probs": [0.5, 0.5]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    assert load_constellation(str(path)) == DiscreteDistribution([-1, 1], [0.5, 0.5])
    assert load_constellation(json.dumps(doc)) == DiscreteDistribution([-1, 1], [0.5, 0.5])
    d_bits = parse_constellation("dgauss:h=0.5")
    d_nats = parse_constellation(f"dgauss:h={0.5 * BITS!r}nats")
    assert entropy(d_bits) == pytest.approx(0.5 * BITS, rel=1e-9)
    assert d_bits == d_nats
    for bad in ("dgauss:h=abc", "[1, 2]", '{"atoms": [1]}', "not json"):
        with pytest.raises(DomainError):
            parse_constellation(bad)
    with pytest.raises(DomainError):
        load_constellation(str(tmp_path / "missing.json"))
