from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onlinecolor import analyze_upper as au
from onlinecolor.analyze_upper import RootedForest

D = 2**30


def exact_p(m_max: int, t_max: int) -> dict[tuple[int, int], Fraction]:
    """Unrounded p'_{m,t} recurrence in exact fractions."""
    p = {(m, 1): Fraction(1) for m in range(1, m_max + 1)}
    for t in range(2, t_max + 1):
        p[1, t] = Fraction(0)
        for m in range(2, m_max + 1):
            best = Fraction(0)
            for ml in range(1, m // 2 + 1):
                mr = m - ml
                a, b = p[ml, t], p[mr, t]
                val = 1 - (1 - a) * (1 - b) + (p[ml, t - 1] - a) * (p[mr, t - 1] - b) / 2
                best = max(best, val)
            p[m, t] = best
    return p


def exact_b(L: int, m_max: int) -> list[Fraction]:
    p = exact_p(m_max, L + 1)
    b = [Fraction(0), Fraction(1)]
    for m in range(2, m_max + 1):
        b.append(1 + max(b[ml] - 1 + b[m - ml] - 1 + p[ml, L + 1] * p[m - ml, L + 1] for ml in range(1, m // 2 + 1)))
    return b


def _root(forest: RootedForest) -> int:
    return forest.roots[0]


def _trees(max_leaves: int):
    for m in range(1, max_leaves + 1):
        for tree in au.binary_trees(m):
            yield m, tree


# forests and sampling ------------------------------------------------------


def test_forest_rejects_bad_parent():
    with pytest.raises(au.ForestError):
        RootedForest([0])
    with pytest.raises(au.ForestError):
        RootedForest([2, 5, -1])


def test_leaf_counts():
    f = RootedForest([2, 2, 4, 4, -1])
    assert f.leaf_count == [1, 1, 2, 1, 3] and f.is_binary()


def test_leaf_only_forest_all_level_one():
    assert au.simulate_forest_levels(RootedForest([-1] * 5), 3) == [1] * 5


def test_cherry_root_half():
    dist = au.exact_level_distribution(RootedForest([2, 2, -1]))[2]
    assert dist == {1: Fraction(1, 2), 2: Fraction(1, 2)}


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10**6))
def test_levels_weakly_increase_to_root(m, seed):
    trees = list(au.binary_trees(m))
    f = trees[seed % len(trees)]
    lv = au.simulate_forest_levels(f, seed)
    assert all(lv[p] >= lv[v] for v, p in enumerate(f.parent) if p != -1)


def test_monte_carlo_matches_exact():
    f = next(t for t in au.binary_trees(4) if t.leaf_count[t.roots[0]] == 4 and all(t.leaf_count[c] == 2 for c in t.children[t.roots[0]]))
    exact = au.exact_level_distribution(f)[_root(f)]
    N = 10**5
    rng = random.Random(11)
    counts: dict[int, int] = {}
    for _ in range(N):
        lvl = au.simulate_forest_levels(f, rng)[_root(f)]
        counts[lvl] = counts.get(lvl, 0) + 1
    for lvl, p in exact.items():
        p = float(p)
        sigma = math.sqrt(p * (1 - p) / N)
        assert abs(counts.get(lvl, 0) / N - p) <= 3 * sigma + 1e-12


def test_tree_cap():
    with pytest.raises(au.ForestTooLarge):
        au.exact_level_distribution(RootedForest([-1] * 70))


# level-2 terminals ---------------------------------------------------------


def test_four_leaf_trees_seven_and_nine_eighths():
    vals = {au.expected_level2_terminals(t) for t in au.binary_trees(4)}
    assert vals == {Fraction(7, 8), Fraction(9, 8)}


def test_a_small_values():
    assert au.max_level2_terminals(1) == 0
    assert au.max_level2_terminals(2) == Fraction(1, 2)


@pytest.mark.parametrize("m", range(1, 7))
def test_closed_form_matches_joint_law(m):
    for tree in au.binary_trees(m):
        assert au.expected_level2_terminals(tree) == au.expected_terminals(tree, 2)


@pytest.mark.parametrize("m", range(1, 8))
def test_a_m_below_gamma_m(m):
    gamma = au.gamma1_closed_form(6)
    assert au.max_level2_terminals(m) <= gamma * m


@pytest.mark.parametrize("k", range(1, 5))
def test_complete_tree_closed_form(k):
    tree = au._forest_from_shape(_complete_shape(k))
    assert au.expected_level2_terminals(tree) == au.complete_tree_level2(k)
    # the other form: sum_i 2^-(2^i-1) 2^(k-i)
    assert au.complete_tree_level2(k) == sum(Fraction(2 ** (k - i), 2 ** (2**i - 1)) for i in range(1, k + 1))


def _complete_shape(k: int):
    return () if k == 0 else (_complete_shape(k - 1), _complete_shape(k - 1))


def test_gamma1_partial_sums():
    assert au.gamma1_closed_form(1) == Fraction(1, 4)
    assert au.gamma1_closed_form(2) == Fraction(9, 32)
    sums = [au.gamma1_closed_form(t) for t in range(1, 8)]
    assert sums == sorted(sums) and len(set(sums)) == len(sums)
    assert all(s < Fraction(282229, 10**6) for s in sums)
    assert Fraction(282228, 10**6) < au.gamma1_closed_form(6)
    with pytest.raises(ValueError):
        au.gamma1_closed_form(0)


# p' and b' -----------------------------------------------------------------


def test_p_prime_small_entries():
    P = au.dp_p_prime(8, 4, D)
    assert (P[1, 1:] == D).all()
    assert P[2, 1] == 0
    assert P[2, 2] == D // 2
    # non-increasing in t
    assert (np.diff(P[1:, 1:], axis=0) <= 0).all()


def test_p_prime_dominates_exact_recurrence():
    P = au.dp_p_prime(24, 5, D)
    ex = exact_p(24, 5)
    for (m, t), v in ex.items():
        assert Fraction(int(P[t, m]), D) >= v
        assert Fraction(int(P[t, m]), D) - v < Fraction(24, D)


@pytest.mark.parametrize("L", [1, 2, 3])
def test_b_prime_dominates_exact_recurrence(L):
    B = au.dp_b_prime(L, 24, D)
    ex = exact_b(L, 24)
    assert B[1] == D and (B[1:] >= D).all()
    for m in range(1, 25):
        assert Fraction(int(B[m]), D) >= ex[m]


def test_b_prime_l1_two_leaves():
    assert au.dp_b_prime(1, 2, D)[2] == D


def test_p_prime_bounds_every_tree():
    P = au.dp_p_prime(6, 5, D)
    for m, tree in _trees(6):
        dist = au.exact_level_distribution(tree)[_root(tree)]
        for t in range(1, 6):
            assert au.prob_at_least(dist, t) * D <= int(P[t, m])


@pytest.mark.parametrize("L", [1, 2])
def test_b_prime_bounds_every_tree(L):
    B = au.dp_b_prime(L, 6, D)
    for m, tree in _trees(6):
        root = au.exact_level_distribution(tree)[_root(tree)]
        truth = au.expected_terminals(tree, L + 1) + 1 - au.prob_at_least(root, L + 1)
        assert truth * D <= int(B[m])


@pytest.mark.parametrize("logD", [10, 14, 20])
def test_round_up_dominance_in_D(logD):
    small, big = 2**logD, 2 ** (logD + 4)
    Ps, Pb = au.dp_p_prime(40, 4, small), au.dp_p_prime(40, 4, big)
    # compare on the finer grid: coarse * 16 >= fine
    assert (Ps[1:, 1:].astype(object) * (big // small) >= Pb[1:, 1:].astype(object)).all()
    Bs, Bb = au.dp_b_prime(2, 40, small), au.dp_b_prime(2, 40, big)
    assert (Bs[1:].astype(object) * (big // small) >= Bb[1:].astype(object)).all()


def test_denominator_must_be_power_of_two():
    with pytest.raises(ValueError):
        au.dp_p_prime(4, 2, 1000)
    with pytest.raises(ValueError):
        au.dp_p_prime(4, 2, 2**31)


def test_monotone_tree_order():
    # A dominates B at every threshold => hanging A under a root with any
    # sibling C dominates hanging B there
    roots = []
    for m in range(1, 5):
        for tree in au.binary_trees(m):
            roots.append(au.exact_level_distribution(tree)[_root(tree)])
    sibs = [d for d, (m, _) in zip(roots, _trees(4)) if m <= 3]
    ts = range(1, 6)
    for a in roots:
        for b in roots:
            if not all(au.prob_at_least(a, t) >= au.prob_at_least(b, t) for t in ts):
                continue
            for c in sibs:
                ja, jb = au._combine([a, c]), au._combine([b, c])
                assert all(au.prob_at_least(ja, t) >= au.prob_at_least(jb, t) for t in ts)


# gamma and formatting ------------------------------------------------------


def test_format_sci_up():
    assert au.format_sci_up(Fraction(1, 4)) == "2.500000e-1"
    assert au.format_sci_up(Fraction(1, 3)) == "3.333334e-1"
    assert au.format_sci_up(Fraction(9999999999, 10**10)) == "1.000000e0"
    with pytest.raises(ValueError):
        au.format_sci_up(Fraction(0))


def test_color_coefficient_rounds_up():
    c = au.color_coefficient(1, Fraction(1, 4))
    assert str(c) == "1.000000"
    c = au.color_coefficient(1, Fraction(1, 3))
    assert c >= Fraction(2) * Fraction(math.log(2)) / Fraction(math.log(3)) - Fraction(1, 10**6)


def test_gamma_window_argmax():
    res = au.gamma_upper_bound(1, 17, 2**20)
    assert 17 <= res.argmax_m <= 33
    B = au.dp_b_prime(1, 33, 2**20)
    assert res.gamma == max(Fraction(int(B[m]), m * 2**20) for m in range(17, 34))
    assert au.table3_schedule(1) == 17
