"""End-to-end acceptance checks.

Every test prints exactly one ``PASS``/``FAIL`` line before asserting.
Hours-scale reproductions are marked ``long`` and only run with ``--long``.
Rows that are known not to reproduce are strict ``xfail``: they must keep
failing, so an accidental "fix" that games the check is noticed.
"""

from __future__ import annotations

import math
import random
import statistics
import time
from fractions import Fraction

import pytest

from onlinecolor import analyze_lower, analyze_upper, bipartite, cli, core, general, k4
from onlinecolor.core import chromatic_number, validate_coloring, verify_certificate
from onlinecolor.general import Params


@pytest.fixture
def report(capsys):
    t0 = time.perf_counter()

    def emit(name: str, ok: bool, info: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {name}: {info} ({time.perf_counter() - t0:.1f}s)")
        assert ok, info

    return emit


def test_firstfit_adversary_half_n(report):
    got, bip = {}, True
    for n in (4, 8, 16, 32, 64):
        s = core.gen_firstfit_adversary(n)
        got[n] = general.run_first_fit(s).colors_used
        if n <= 12:
            bip &= chromatic_number(range(n), s.edges()) <= 2
        else:
            sides = s.meta["sides"]
            bip &= all(sides[i] != sides[j] for j, i in s.edges())
    report("firstfit-adversary", bip and all(got[n] == n // 2 for n in got), f"colors {got}, bipartite {bip}")


def test_lst89_ceiling(report):
    worst, runs = 0.0, 0
    for seed in range(200):
        kind = seed % 3
        if kind == 0:
            s = core.gen_grade_instance(seed % 9, seed)
        elif kind == 1:
            s = core.gen_random_tree(5 + seed * 5, seed)
        else:
            s = core.gen_random_bipartite(10 + seed * 3, 0.1, seed)
        run = bipartite.lst89(s)
        assert validate_coloring(s, run.ledger).ok
        worst = max(worst, run.colors_used / (2 * math.log2(s.n + 1)))
        runs += 1
    report("lst89-ceiling", worst <= 1.0, f"{runs} runs, max colors/(2 log2(n+1)) = {worst:.4f}")


def _equivalence(forests) -> tuple[int, int]:
    ok = n = 0
    for f in forests:
        s = core.gen_tree_merge_instance(f.parent, seed=len(f))
        ok += bipartite.exact_randomized_levels(s) == analyze_upper.exact_joint_level_distribution(f, cap=64)
        n += 1
    return ok, n


def test_level_distribution_equivalence(report):
    # every forest up to 6 leaves without unary vertices, and every forest
    # up to 5 leaves with them; the full 6-leaf unary sweep is the long test
    ok1, n1 = _equivalence(analyze_upper.rooted_forests(6, allow_unary=False))
    ok2, n2 = _equivalence(analyze_upper.rooted_forests(5, allow_unary=True))
    report("level-distribution", ok1 == n1 and ok2 == n2, f"{ok1}/{n1} forests (no unary, <=6 leaves), {ok2}/{n2} (unary, <=5 leaves)")


@pytest.mark.long
def test_level_distribution_equivalence_all_six_leaf(report):
    ok, n = _equivalence(analyze_upper.rooted_forests(6, allow_unary=True))
    report("level-distribution-full", ok == n, f"{ok}/{n} forests with <=6 leaves")


def test_level2_terminal_values(report):
    got = [analyze_upper.max_level2_terminals(m) for m in range(1, 5)]
    want = [Fraction(0), Fraction(1, 2), Fraction(3, 4), Fraction(9, 8)]
    report("level2-terminals", got == want, f"a_1..a_4 = {[str(x) for x in got]}")


def test_gamma_closed_form(report):
    g6 = analyze_upper.gamma1_closed_form(6)
    in_range = Fraction(282228, 10**6) < g6 < Fraction(282229, 10**6)
    formula = lambda k: 2**k * analyze_upper.gamma1_closed_form(k)
    complete = all(
        analyze_upper.expected_level2_terminals(analyze_upper._forest_from_shape(_complete(k))) == formula(k)
        for k in range(1, 5)
    )
    # and the complete tree is the maximiser where exhaustive search is cheap
    maxima = all(analyze_upper.max_level2_terminals(2**k) == formula(k) for k in range(1, 4))
    report("gamma-closed-form", in_range and complete and maxima, f"gamma(6 terms) = {float(g6):.9f}, complete trees k<=4 {complete}, maxima k<=3 {maxima}")


def _complete(k: int):
    return () if k == 0 else (_complete(k - 1), _complete(k - 1))


TABLE_ROWS = [
    pytest.param(1),
    pytest.param(2),
    # the unrounded recurrence (checked on a 2^60 grid) already exceeds the
    # published value in the last digit, so a valid round-up cannot match;
    # kept as strict xfail rather than tuned
    pytest.param(3, marks=pytest.mark.xfail(strict=True, reason="last digit of gamma' one unit high")),
    pytest.param(4, marks=pytest.mark.xfail(strict=True, reason="last digit of gamma' one unit high")),
    pytest.param(5),
] + [pytest.param(L, marks=pytest.mark.long) for L in range(6, 11)]


@pytest.mark.parametrize("L", TABLE_ROWS)
def test_upper_bound_table_row(report, L):
    res = analyze_upper.gamma_upper_bound(L, analyze_upper.table3_schedule(L), 2**30)
    got = (res.gamma_str, str(res.coefficient))
    want = analyze_upper.published_row(L)
    report(f"upper-bound-L{L}", got == want, f"got {got[0]} {got[1]}, published {want[0]} {want[1]}")


def test_phi1_merge_bound(report):
    low, exceptional = analyze_lower.phi1_merge_bound(3)
    ok = low >= Fraction(3, 4) and exceptional == {Fraction(1)}
    report("phi1-merge", ok, f"min expected increase {low}, exceptional values {sorted(map(str, exceptional))}")


def test_lower_bound_anchors(report):
    e = analyze_lower.EMPTY
    a = analyze_lower.phi2_evaluator().g_states(e, e)
    b = analyze_lower.PairEvaluator(analyze_lower.PHI_B).g_states(e, e)
    report("lower-bound-anchors", (a, b) == (Fraction(31, 42), Fraction(1, 3)), f"phi2 {a}, phiB {b}")


def _search(report, mode, counts, target):
    res = cli.run_lower(mode)
    got = (res.count_pruned_pass, res.count_rows_with_1_and_2, res.count_threshold_pass)
    m = res.min_potential_increase
    ok = got == counts and m is not None and m >= target
    report(f"search-{mode}", ok, f"counts {got}, min {m} (target >= {target})")


def test_phi2_search(report):
    _search(report, "phi2", (62195, 22558, 16829), Fraction(89, 48))


@pytest.mark.long
def test_phiAB_search(report):
    _search(report, "phiAB", (1773334, 700415, 415942), Fraction(91, 96))


# invariant suite -----------------------------------------------------------


def _general_instance(rng: random.Random, seed: int):
    n = rng.randint(10, 120)
    kind = seed % 4
    if kind == 0:
        return core.gen_random_k_colorable(n, rng.randint(2, 6), rng.choice([0.1, 0.3, 0.7]), seed)
    if kind == 1:
        return core.gen_grade_instance(rng.randint(0, 4), seed)
    if kind == 2:
        return core.gen_random_tree(n, seed)
    return core.ArrivalStream([frozenset(j for j in range(i) if rng.random() < 0.3) for i in range(n)])


def test_invariant_suite(report):
    counts = {"general": 0, "k4": 0, "bipartite": 0}
    aborts = verified = 0
    for seed in range(220):
        rng = random.Random(seed)
        s = _general_instance(rng, seed)
        params = Params(scale=rng.choice([0.02, 0.1, 0.5]))
        which = seed % 5
        if which == 0:
            res = general.color_locally_l(s, 2, params)
        elif which == 1:
            res = general.color_locally_l(s, 3, params)
        elif which == 2:
            res = general.color_k_colorable(s, 3 + seed % 2, params)
        elif which == 3:
            res = general.competitive_wrapper(s, params)
        else:
            res = general.run_first_fit(s)
        assert validate_coloring(s, res.ledger).ok and res.ledger.layers_disjoint()
        cert = res.certificate
        if cert is not None:
            aborts += 1
            if cert.witness and len(cert.witness) <= 12 and cert.kind != "not-k-colorable":
                assert verify_certificate(cert, s.adjacency(), 12) is True
                verified += 1
        counts["general"] += 1
    for seed in range(150):
        rng = random.Random(10_000 + seed)
        s = core.gen_random_k_colorable(rng.randint(30, 250), 4, rng.choice([0.2, 0.4, 0.6]), seed)
        res = k4.color_4_colorable(s, Params(scale=rng.choice([0.02, 0.05, 0.2])))
        assert validate_coloring(s, res.ledger).ok and not res.aborts
        for e in res.algo.epochs:
            assert e.groups_disjoint() and e.surviving_3color_seeds_disjoint()
            assert e.seed_sizes_capped() and e.alpha_beta_free()
        counts["k4"] += 1
    for seed in range(200):
        rng = random.Random(20_000 + seed)
        kind = seed % 3
        if kind == 0:
            s = core.gen_grade_instance(rng.randint(0, 7), seed)
        elif kind == 1:
            s = core.gen_random_tree(rng.randint(1, 300), seed)
        else:
            s = core.gen_random_bipartite(rng.randint(1, 200), rng.choice([0.05, 0.2]), seed)
        det, ran = bipartite.lst89(s), bipartite.randomized_lst(s, seed)
        assert validate_coloring(s, det.ledger).ok and validate_coloring(s, ran.ledger).ok
        counts["bipartite"] += 1
    # round-up dominance: a finer grid never gives a larger value
    small, big = 2**12, 2**16
    dom = all(
        (analyze_upper.dp_b_prime(L, 65, small).astype(object) * (big // small) >= analyze_upper.dp_b_prime(L, 65, big).astype(object)).all()
        for L in (1, 2, 3)
    )
    total = sum(counts.values())
    report("invariants", total >= 500 and dom, f"{total} instances {counts}, {aborts} aborts, {verified} certificates verified, dominance {dom}")


@pytest.mark.xfail(strict=True, reason="grade instances do not separate the two algorithms by 0.5 colors")
def test_randomized_beats_deterministic(report):
    diffs = []
    det_total = ran_total = 0
    for seed in range(1000):
        s = core.gen_grade_instance(8, seed)
        d = bipartite.lst89(s).colors_used
        r = bipartite.randomized_lst(s, seed).colors_used
        diffs.append(d - r)
        det_total += d
        ran_total += r
    margin = statistics.fmean(diffs)
    adv = bipartite.gen_lst89_adversary(8)
    adv_det = bipartite.lst89(adv).colors_used
    adv_ran = statistics.fmean(bipartite.randomized_lst(adv, s).colors_used for s in range(200))
    report(
        "randomized-vs-deterministic",
        margin >= 0.5,
        f"grade-8 mean colors lst89 {det_total / 1000:.3f}, randomized {ran_total / 1000:.3f}, paired margin {margin:.3f} (need >= 0.5); "
        f"fixed adversary h=8: lst89 {adv_det}, randomized mean {adv_ran:.2f}",
    )
