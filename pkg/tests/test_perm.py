import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mallows_hitrun.perm import (Permutation, Stat, adjacent_transposition_distance, compose, cross_term,
                                 cycle_count, cycle_length_containing, cycle_lengths, fixed_points, identity,
                                 inversion_count, invert, l1_distance, l2_distance, lis_length,
                                 merge_inversion_count, positive_displacement_sum, reverse, statistics)


@st.composite
def perms(draw, min_n=1, max_n=30):
    n = draw(st.integers(min_n, max_n))
    return Permutation(tuple(draw(st.permutations(range(1, n + 1)))))


def P(*xs):
    return Permutation(xs)


def all_perms(n):
    return [Permutation(p) for p in itertools.permutations(range(1, n + 1))]


# -- construction ------------------------------------------------------------

def test_identity_examples():
    assert identity(3).mapping == (1, 2, 3)
    assert identity(1).mapping == (1,)
    s = P(3, 1, 5, 2, 4)
    assert compose(identity(5), s) == s
    assert compose(s, identity(5)) == s


@pytest.mark.parametrize("bad", [(), (1, 1), (0, 1), (2, 3), (1, 2, 4)])
def test_rejects_non_bijections(bad):
    with pytest.raises(ValueError):
        Permutation(bad)


def test_identity_rejects_zero():
    with pytest.raises(ValueError):
        identity(0)


def test_compose_and_invert():
    s = P(2, 3, 1)
    assert compose(s, invert(s)) == identity(3)
    assert invert(s) == P(3, 1, 2)
    assert compose(P(2, 1, 3), P(2, 1, 3)) == identity(3)
    # (a o b)(i) = a(b(i))
    a, b = P(2, 3, 1), P(1, 3, 2)
    assert compose(a, b).mapping == tuple(a(b(i)) for i in (1, 2, 3))


def test_size_mismatch():
    with pytest.raises(ValueError):
        compose(identity(2), identity(3))
    with pytest.raises(ValueError):
        l1_distance(identity(2), identity(3))
    with pytest.raises(ValueError):
        adjacent_transposition_distance(identity(2), identity(3))


@given(perms())
def test_invert_is_inverse(s):
    assert compose(invert(s), s) == identity(s.n)
    assert compose(s, invert(s)) == identity(s.n)


# -- distances ---------------------------------------------------------------

def test_distance_examples():
    ident = identity(3)
    assert l1_distance(ident, ident) == 0
    assert l1_distance(P(2, 1, 3), ident) == 2
    assert l1_distance(P(2, 3, 1), ident) == 4
    assert l2_distance(ident, ident) == 0
    assert l2_distance(P(2, 1, 3), ident) == 2
    assert l2_distance(P(3, 2, 1), ident) == 8


def test_positive_displacement_examples():
    assert positive_displacement_sum(identity(4)) == 0
    assert positive_displacement_sum(P(2, 3, 1)) == 2


def test_positive_displacement_random_n8(rng):
    for _ in range(1000):
        s = Permutation(tuple(rng.permutation(8) + 1))
        assert 2 * positive_displacement_sum(s) == l1_distance(s, identity(8))


@pytest.mark.parametrize("n", range(1, 7))
def test_footrule_halving_exhaustive(n):
    for s in all_perms(n):
        assert l1_distance(s, identity(n)) == 2 * positive_displacement_sum(s)


@given(perms(max_n=1000))
def test_footrule_halving_large(s):
    assert l1_distance(s, identity(s.n)) == 2 * positive_displacement_sum(s)


def test_cross_term_examples():
    assert cross_term(identity(3)) == 14
    assert cross_term(P(3, 2, 1)) == 10
    assert max(all_perms(3), key=cross_term) == identity(3)


@given(perms())
def test_l2_from_cross_term(s):
    n = s.n
    assert l2_distance(s, identity(n)) == 2 * sum(i * i for i in range(1, n + 1)) - 2 * cross_term(s)


# -- cycles -------------------------------------------------------------------

def test_cycle_examples():
    assert cycle_count(identity(5)) == 5
    assert fixed_points(identity(5)) == 5
    s = P(2, 3, 1)
    assert cycle_count(s) == 1
    assert fixed_points(s) == 0
    assert cycle_length_containing(s, 2) == 3
    t = P(2, 1, 3)
    assert cycle_count(t) == 2
    assert cycle_length_containing(t, 3) == 1


@pytest.mark.parametrize("k", [0, 4])
def test_cycle_length_range(k):
    with pytest.raises(IndexError):
        cycle_length_containing(identity(3), k)


@given(perms())
def test_cycle_structure(s):
    lengths = cycle_lengths(s)
    assert sum(lengths) == s.n
    assert len(lengths) == cycle_count(s)
    assert lengths.count(1) == fixed_points(s)


@pytest.mark.parametrize("n", range(1, 8))
@pytest.mark.parametrize("beta2", [0.0, 0.7, 2.0])
def test_cayley_partition_function(n, beta2):
    total = sum(math.exp(beta2 * cycle_count(s)) for s in all_perms(n))
    closed = math.prod(math.exp(beta2) + k for k in range(n))
    assert total == pytest.approx(closed, rel=1e-12)


# -- LIS ----------------------------------------------------------------------

def _lis_brute(m):
    n = len(m)
    best = 0
    for mask in range(1 << n):
        sub = [m[i] for i in range(n) if mask >> i & 1]
        if all(a < b for a, b in zip(sub, sub[1:])):
            best = max(best, len(sub))
    return best


def test_lis_examples():
    assert lis_length(identity(7)) == 7
    assert lis_length(reverse(7)) == 1
    assert lis_length(P(2, 1, 4, 3)) == 2


def test_lis_exhaustive_s6():
    for s in all_perms(6):
        assert lis_length(s) == _lis_brute(s.mapping)


# -- adjacent transposition distance ------------------------------------------

def test_adjacent_distance_examples():
    assert adjacent_transposition_distance(P(3, 1, 2), P(3, 1, 2)) == 0
    assert adjacent_transposition_distance(identity(3), P(2, 1, 3)) == 1
    assert adjacent_transposition_distance(identity(3), P(3, 2, 1)) == 3


def _bfs_distance(n):
    """Graph distance from every permutation to the others under left
    multiplication by adjacent transpositions (swap values v, v+1)."""
    states = [p for p in itertools.permutations(range(1, n + 1))]
    dist = {}
    for src in states:
        seen = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for p in frontier:
                for v in range(1, n):
                    q = tuple(v + 1 if x == v else v if x == v + 1 else x for x in p)
                    if q not in seen:
                        seen[q] = seen[p] + 1
                        nxt.append(q)
            frontier = nxt
        dist[src] = seen
    return dist


def test_adjacent_distance_is_graph_metric_s4():
    bfs = _bfs_distance(4)
    ps = all_perms(4)
    for a in ps:
        for b in ps:
            d = adjacent_transposition_distance(a, b)
            assert d == bfs[a.mapping][b.mapping]
            assert d == adjacent_transposition_distance(b, a)
            assert (d == 0) == (a == b)
            for c in ps[::3]:
                assert d <= adjacent_transposition_distance(a, c) + adjacent_transposition_distance(c, b)


@given(st.lists(st.integers(-50, 50), max_size=400))
def test_inversion_count_paths_agree(values):
    brute = sum(1 for i in range(len(values)) for j in range(i + 1, len(values)) if values[i] > values[j]) \
        if len(values) < 120 else None
    got = inversion_count(values)
    assert got == merge_inversion_count(values)
    if brute is not None:
        assert got == brute


def test_inversion_count_long_input(rng):
    v = rng.permutation(2000).tolist()
    a = np.asarray(v)
    dense = int(sum(np.count_nonzero(a[i + 1:] < a[i]) for i in range(len(a))))
    assert inversion_count(v) == dense


# -- statistics record ----------------------------------------------------------

@given(perms())
def test_statistics_ranges(s):
    rec = statistics(s)
    n = s.n
    assert 0 <= rec.t1_fixed_points <= n
    assert 1 <= rec.t2_cycle_len_mid <= n
    assert 1 <= rec.t3_lis <= n
    assert 1 <= rec.cycles <= n
    assert rec.h_l1 % 2 == 0
    assert rec.h_l1 == l1_distance(s, identity(n))
    assert rec.h_l2 == l2_distance(s, identity(n))
    assert rec.mean_displacement == pytest.approx(rec.h_l1 / n)
    assert rec.t2_cycle_len_mid == cycle_length_containing(s, math.ceil(n / 2))


def test_statistics_selection():
    rec = statistics(P(2, 1, 3), {Stat.T1})
    assert rec.t1_fixed_points == 1
    assert rec.t3_lis is None and rec.h_l1 is None
