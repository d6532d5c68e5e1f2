import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mallows_hitrun.models import L1, L2, LatticeL2, TwoParam, WeightedL1, WeightedL2
from mallows_hitrun.oracle import (EnumerationLimit, chi_square_gof, enumerate_model, exact_expectation,
                                   exact_hitrun_kernel, table_from_log_weights, tv_distance, uniform_table)
from mallows_hitrun.perm import Permutation, cycle_count, fixed_points, identity, l1_distance


def test_l1_partition_function_n3():
    beta = 0.37
    t = enumerate_model(L1(beta), 3)
    assert math.exp(t.log_Z) == pytest.approx(1 + 2 * math.exp(-2 * beta) + 3 * math.exp(-4 * beta), rel=1e-12)


@pytest.mark.parametrize("model", [L1(1e-12), L2(1e-12), WeightedL1(1e-12, (1, 2, 3, 4)),
                                   WeightedL2(1e-12, (1, 2, 3, 4)), TwoParam(1e-12, 0.0)],
                         ids=lambda m: type(m).__name__)
def test_small_beta_is_uniform(model):
    t = enumerate_model(model, 4)
    assert np.allclose(t.probabilities, 1 / 24, atol=1e-9)


@pytest.mark.parametrize("beta2", [0.0, 0.5, 2.0])
def test_cayley_closed_form_n5(beta2):
    t = enumerate_model(TwoParam(1e-9, beta2), 5)
    closed = math.prod(math.exp(beta2) + k for k in range(5))
    assert math.exp(t.log_Z) == pytest.approx(closed, rel=1e-6)


def test_expectation_examples():
    assert exact_expectation(uniform_table(3), fixed_points) == pytest.approx(1.0)
    sharp = enumerate_model(L1(60.0), 4)
    assert exact_expectation(sharp, lambda s: l1_distance(s, identity(4))) == pytest.approx(0.0, abs=1e-40)


@pytest.mark.parametrize("beta2", [0.3, 1.0, 2.5])
def test_expected_cycles_identity(beta2):
    t = enumerate_model(TwoParam(1e-12, beta2), 3)
    e = math.exp(beta2)
    assert exact_expectation(t, cycle_count) == pytest.approx(sum(e / (e + k) for k in range(3)), rel=1e-9)


@pytest.mark.parametrize("model", [L1(0.3), L2(0.1), TwoParam(0.3, 1.0), LatticeL2(0.2, 2, 2)],
                         ids=lambda m: type(m).__name__)
def test_probabilities_normalised_and_proportional(model):
    t = enumerate_model(model, None if isinstance(model, LatticeL2) else 5)
    assert abs(t.probabilities.sum() - 1) < 1e-12
    ratio = t.probabilities / np.exp(t.log_weights)
    assert np.allclose(ratio, ratio[0], rtol=1e-12)
    assert t.prob(t.states[3]) == t.probabilities[3]


def test_reordering_invariance(rng):
    t = enumerate_model(L1(0.4), 4)
    perm = rng.permutation(len(t.states))
    u = table_from_log_weights([t.states[k] for k in perm], t.log_weights[perm])
    for s in t.states:
        assert u.prob(s) == pytest.approx(t.prob(s), rel=1e-12)


def test_lexicographic_order():
    t = enumerate_model(L1(0.4), 3)
    assert [s.mapping for s in t.states] == sorted(s.mapping for s in t.states)


def test_enumeration_limit():
    with pytest.raises(EnumerationLimit, match="enumeration limit exceeded"):
        enumerate_model(L1(0.3), 9)
    with pytest.raises(EnumerationLimit):
        exact_hitrun_kernel(L1(0.3), 6)


def test_tv_examples():
    assert tv_distance([0.2, 0.8], [0.2, 0.8]) == 0
    assert tv_distance([1, 0], [0, 1]) == 1
    assert tv_distance([0.5, 0.5], [1, 0]) == 0.5
    with pytest.raises(ValueError):
        tv_distance([1.0], [0.5, 0.5])


dists = st.integers(2, 8).flatmap(
    lambda k: st.tuples(*[st.lists(st.floats(0, 1), min_size=k, max_size=k).filter(lambda v: sum(v) > 0)] * 3))


@given(dists)
def test_tv_is_bounded_metric(triple):
    p, q, r = (np.array(v) / sum(v) for v in triple)
    assert 0 <= tv_distance(p, q) <= 1 + 1e-12
    assert tv_distance(p, q) == pytest.approx(tv_distance(q, p))
    assert tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12


def test_chi_square_flags_off_support_counts():
    res = chi_square_gof([5, 5, 1], [0.5, 0.5, 0.0])
    assert res.p_value == 0.0 and not res.passed()
    res = chi_square_gof([5000, 5000, 0], [0.5, 0.5, 0.0])
    assert res.passed() and res.dof == 1


def test_table_sampling(rng):
    t = enumerate_model(L1(0.5), 3)
    idx = t.sample(rng, 60000)
    emp = np.bincount(idx, minlength=6) / 60000
    assert tv_distance(emp, t.probabilities) < 0.02
    assert isinstance(t.states[0], Permutation)
