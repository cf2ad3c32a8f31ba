from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onlinecolor import core, general
from onlinecolor.core import ArrivalStream, Graph, chromatic_number, validate_coloring, verify_certificate
from onlinecolor.general import (
    DoublingWrapper,
    FirstFitAlgo,
    FramedColorer,
    LevelSubproblem,
    Params,
    budget_function,
    epoch_length,
    find_small_witness,
    with_unknown_n,
)


def subproblems(algo):
    """Every level subproblem reachable from an algorithm object."""
    if isinstance(algo, DoublingWrapper):
        for inner in algo.inners:
            yield from subproblems(inner)
    elif isinstance(algo, FramedColorer):
        yield from subproblems(algo.else_problem)
    elif isinstance(algo, LevelSubproblem):
        for p in algo.descendants():
            yield p
            if p.base is not None:
                yield from subproblems(p.base)


def _mixed_stream(seed: int) -> ArrivalStream:
    rng = random.Random(seed)
    n = rng.randint(20, 160)
    kind = seed % 4
    if kind == 0:
        return core.gen_random_k_colorable(n, rng.randint(2, 5), rng.choice([0.1, 0.3, 0.6]), seed)
    if kind == 1:
        return core.gen_grade_instance(rng.randint(1, 5), seed)
    if kind == 2:
        return core.gen_random_tree(n, seed)
    return core.gen_random_bipartite(n, 0.2, seed)


# doubling ------------------------------------------------------------------


def test_epoch_lengths_sqrt():
    f = lambda t: math.ceil(math.sqrt(t))
    assert [epoch_length(f, i) for i in range(4)] == [1, 4, 16, 64]


def test_single_vertex_one_epoch():
    f = lambda t: math.ceil(math.sqrt(t))
    res, prefix = general.run_doubling_first_fit(ArrivalStream([frozenset()]), f)
    assert prefix == [1] and prefix[0] <= 4 * f(1)
    assert res.algo.schedule == [1]


def test_edgeless_colors_equal_epochs():
    f = lambda t: math.ceil(math.sqrt(t))
    res, prefix = general.run_doubling_first_fit(ArrivalStream([frozenset()] * 100), f)
    assert prefix[-1] == len(res.algo.schedule) <= 4 * f(100)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 120), st.floats(0.0, 1.0), st.integers(0, 10**6))
def test_doubling_bound_every_prefix(n, p, seed):
    # FirstFit on t vertices uses <= t colors, so f(t) = t is a valid budget
    stream = core.gen_random_k_colorable(n, max(1, n), p, seed)
    f = lambda t: t
    _, prefix = general.run_doubling_first_fit(stream, f)
    assert all(c <= 4 * f(m) for m, c in enumerate(prefix, start=1))


def test_with_unknown_n_fresh_colors_per_epoch():
    g = Graph()
    params = Params()
    algo = with_unknown_n(lambda t: FirstFitAlgo(g, params), budget_function(0.5), g, params)
    keys = []
    for _ in range(10):
        v = g.add_vertex([])
        keys.append(algo.add(v))
    epochs = {k[0] for k in keys}
    assert len(set(keys)) == len(epochs) == len(algo.schedule)


# witness search ------------------------------------------------------------


def test_witness_trivial_levels():
    g = Graph()
    g.add_vertex([])
    g.add_vertex([0])
    assert find_small_witness(g, {0, 1}, 1, 0, 7) == frozenset({1})
    assert find_small_witness(g, {0, 1}, 1, 1, 7) == frozenset({0, 1})
    assert find_small_witness(g, {1}, 1, 1, 7) is None


def test_witness_finds_odd_cycle():
    g = Graph()
    for nb in ([], [0], [1], [2], [3, 0]):  # C5 closing at vertex 4
        g.add_vertex(nb)
    X = find_small_witness(g, set(range(5)), 4, 2, 7)
    assert X == frozenset(range(5))
    assert chromatic_number(X, g.induced_edges(X)) == 3


# locally l-colorable -------------------------------------------------------


def test_locally_one_edgeless():
    res = general.color_locally_l(ArrivalStream([frozenset()] * 30), 1)
    assert res.colors_used == 1 and not res.aborts


@pytest.mark.parametrize("n", [2, 10, 50])
def test_locally_two_paths(n):
    s = ArrivalStream([frozenset()] + [frozenset({i - 1}) for i in range(1, n)])
    res = general.color_locally_l(s, 2, Params(scale=0.1))
    assert validate_coloring(s, res.ledger).ok and not res.aborts


def test_locally_two_triangle_aborts_with_witness():
    # five isolated vertices fill the epochs of length 1 and 4; in the third
    # epoch FirstFit has budget 1, vertex 6 spawns a child seeded {5} and
    # the triangle 5-7-8 closes inside that child's base case
    s = ArrivalStream([frozenset()] * 6 + [frozenset({5}), frozenset({5}), frozenset({5, 7})])
    res = general.color_locally_l(s, 2, Params(scale=0.01))
    assert validate_coloring(s, res.ledger).ok
    assert res.certificate is not None
    X = res.certificate.witness
    assert {5, 7, 8} <= X
    assert chromatic_number(X, Graph_from(s).induced_edges(X)) == 3


def Graph_from(stream: ArrivalStream) -> Graph:
    g = Graph()
    for nb in stream.events:
        g.add_vertex(nb)
    return g


# level-d subproblem --------------------------------------------------------


def test_base_case_edgeless_one_color():
    g = Graph()
    p = LevelSubproblem(g, Params(), "local", 2, 1, [4, 4, 1, 1, 1], top=1)
    s = g.add_vertex([])
    p.add_s(s)
    keys = {p.add(g.add_vertex([s])) for _ in range(5)}
    assert len(keys) == 1 and not p.aborted


def test_level0_triangle_spawns_then_row_aborts():
    g = Graph()
    p = LevelSubproblem(g, Params(), "local", 2, 0, [1, 1, 1, 1], top=1)
    s = g.add_vertex([])
    p.add_s(s)
    p.add(g.add_vertex([s]))  # D gets a witness at once: spawn one child
    assert len(p.rows) == 1 and len(p.rows[0]) == 1 and p.rows[0][0].seed == frozenset({s})
    a = g.add_vertex([s])
    p.add(a)
    b = g.add_vertex([s, a])
    p.add(b)
    assert p.aborted and p.certificate.kind == "not-l-color-set"
    X = p.certificate.witness
    assert {s, a, b} <= X
    assert verify_certificate(p.certificate, [g.adj[v] for v in range(len(g))]) is True


def test_degree_precondition_rejected():
    g = Graph()
    p = LevelSubproblem(g, Params(), "local", 3, 0, [10, 5, 2, 1, 1], top=2)
    with pytest.raises(ValueError):
        p.add(g.add_vertex([]))


def test_spawn_seeds_distinct():
    g = Graph()
    S = [g.add_vertex([]) for _ in range(6)]
    p = LevelSubproblem(g, Params(), "local", 3, 1, [6, 6, 2, 1, 1], top=2)
    for s in S:
        p.add_s(s)
    # level 1: the buffer D is fine until it holds an edge
    a = g.add_vertex([S[0], S[1]])
    p.add(a)
    b = g.add_vertex([S[2], S[3], a])
    p.add(b)
    assert len(p.rows) == 1
    seeds = [sp.seed for sp in p.rows[0]]
    assert len(seeds) == len(p.Q[0]) == 2 and seeds[0] != seeds[1]


# k-colorable ---------------------------------------------------------------


def test_k2_delegates_to_lst():
    s = core.gen_grade_instance(5, 1)
    res = general.color_k_colorable(s, 2)
    assert validate_coloring(s, res.ledger).ok
    assert res.colors_used <= 2 * math.log2(s.n + 1)
    assert set(res.ledger.per_layer_colors()) == {"main"}


def test_k3_planted_300():
    s = core.gen_random_k_colorable(300, 3, 0.3, 4)
    res = general.color_k_colorable(s, 3, Params(scale=0.2))
    assert validate_coloring(s, res.ledger).ok and not res.aborts


def test_k2_odd_cycle_never_improper():
    s = ArrivalStream([frozenset()] + [frozenset({i - 1}) for i in range(1, 7)] + [frozenset({0, 6})])
    res = general.color_k_colorable(s, 2)
    assert validate_coloring(s, res.ledger).ok


def test_eps_choices():
    assert general.eps_k(4) == pytest.approx(1 / 6)
    assert general.eps_k(4, improved=True) == pytest.approx(6 / 34)
    assert general.eps_locally(2) == pytest.approx(0.5)


# competitive wrapper -------------------------------------------------------


def test_competitive_edgeless():
    res = general.competitive_wrapper(ArrivalStream([frozenset()] * 40))
    # one FirstFit color per doubling epoch (each epoch gets fresh colors)
    assert not res.aborts and res.colors_used == len(res.algo.schedule)


def test_competitive_dense_aborts_then_unique():
    s = core.gen_random_k_colorable(60, 30, 0.9, 2)
    res = general.competitive_wrapper(s, Params(scale=0.05))
    assert validate_coloring(s, res.ledger).ok
    assert res.aborts and res.colors_used <= s.n
    tail = [res.ledger.assignment[v] for v in range(res.abort_index + 1, s.n)]
    assert len(set(tail)) == len(tail)


@pytest.mark.parametrize("seed", range(3))
def test_competitive_bipartite_within_budget(seed):
    s = core.gen_random_bipartite(256, 0.1, seed)
    res = general.competitive_wrapper(s)
    ell = general.competitive_ell(s.n)
    f = budget_function(general.eps_locally(ell))
    assert not res.aborts and res.colors_used <= 4 * f(s.n)


def test_competitive_ell_floor():
    assert general.competitive_ell(16) == 2 and general.competitive_ell(2**2**6) == 3


# properties ----------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.05, 0.2, 1.0]), st.sampled_from(["l2", "l3", "k3"]))
def test_proper_and_certified(seed, scale, which):
    s = _mixed_stream(seed) if seed % 2 else core.gen_random_k_colorable(80, 3 + seed % 4, 0.4, seed)
    params = Params(scale=scale)
    if which == "k3":
        res = general.color_k_colorable(s, 3, params)
    else:
        res = general.color_locally_l(s, int(which[1]), params)
    assert validate_coloring(s, res.ledger).ok
    assert res.ledger.layers_disjoint()
    if res.certificate is not None and res.certificate.witness and which != "k3":
        assert verify_certificate(res.certificate, s.adjacency(), params.oracle_cap) in (True, None)
    if which == "k3" and s.meta.get("k", 99) <= 3:
        assert not res.aborts


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_row_representatives_overlap(seed):
    s = core.gen_random_k_colorable(150, 3 + seed % 3, 0.5, seed)
    res = general.color_locally_l(s, 3, Params(scale=0.05))
    for p in subproblems(res.algo):
        if not isinstance(p, LevelSubproblem):
            continue
        reps = p.row_representatives()
        for i in range(len(reps)):
            for j in range(i + 1, len(reps)):
                assert len(reps[i] & reps[j]) <= p.gam[p.d + 2]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_buffer_epochs_use_disjoint_colors(seed):
    s = core.gen_random_k_colorable(150, 4, 0.5, seed)
    res = general.color_locally_l(s, 3, Params(scale=0.05))
    for p in subproblems(res.algo):
        if not isinstance(p, LevelSubproblem):
            continue
        by_epoch: dict[int, set[int]] = {}
        for v, key in p.keys.items():
            if isinstance(key, tuple) and key[0] == "D":
                by_epoch.setdefault(key[1], set()).add(res.ledger.assignment[v])
        seen: set[int] = set()
        for cols in by_epoch.values():
            assert not (seen & cols)
            seen |= cols
