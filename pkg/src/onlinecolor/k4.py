"""Online coloring of 4-colorable graphs.

Pipeline for a known ``n`` (:class:`FourColorerFixed`):

1. outer FirstFit within ``2 n^{14/17}`` colors; its vertices form ``S0``;
2. every other vertex (``T0``) passes the Division filters, one per pair
   ``(alpha_i, beta_i)``.  A filter may color the vertex through a 2-color
   set subroutine, give it a dense-group special color, or open a new dense
   group; otherwise the vertex moves on;
3. vertices that pass every filter (``T_A``) go to No-Dense-Case: 3-color
   set subroutines, an inner FirstFit within ``n^{13/17}`` colors, and the
   1-color candidates problem whose abort families seed new 3-color set
   subroutines.

``S0``-``T0`` edges whose ``S0`` end arrives after the ``T0`` end are
ignored: ``N_{S0}(t)`` is frozen when ``t`` arrives (and later only shrinks
through Division's edge deletions).  All thresholds are real-valued powers
of ``n`` times ``params.scale``, floored and clamped to at least 1.

:class:`FourColorer` wraps the fixed-``n`` algorithm in the doubling
schedule so ``n`` need not be known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .core import AbortCertificate, ArrivalStream, ColoringLedger, Graph
from .general import (
    DoublingWrapper,
    FirstFitAlgo,
    Key,
    LevelSubproblem,
    OnlineAlgo,
    Params,
    RunResult,
    budget_function,
    run_online,
    scaled,
)

EPS4 = 1.0 / 6.0  # 2/(k(k-1)) at k = 4


def _relaxed(params: Params) -> Params:
    # desk-scale thresholds break the asymptotic degree guarantees; the
    # sub-solvers must not reject such vertices
    return replace(params, check_degree=False)


# ---------------------------------------------------------------------------
# fixed-S color-set solvers and the candidates problem


def color_set_gammas(size: int, n: int, d: int, scale: float = 1.0) -> list[int]:
    """Thresholds for the fixed-``S`` level-``d`` problem with ``gamma_d = |S|``.

    ``gamma_i = |S| / (2^{(i(i-1) - d(d-1))/2} n'^{(i-d) eps})`` with
    ``n' = n^{18/17}`` and ``eps = 1/6``; entries below ``d`` are unused.
    """
    n_eff = n ** (18 / 17)
    out = []
    for i in range(5):
        if i <= d:
            out.append(size)
        else:
            out.append(scaled(size / (2 ** ((i * (i - 1) - d * (d - 1)) / 2) * n_eff ** ((i - d) * EPS4)), scale))
    return out


def color_set_solver(graph: Graph, params: Params, S: Iterable[int], n: int, colors: int, gam: Sequence[int] | None = None) -> LevelSubproblem:
    """``3-Color(S)`` (``colors=3``) or ``2-Color(S)`` (``colors=2``) for ``k = 4``."""
    d = 4 - colors
    S = frozenset(S)
    gam = color_set_gammas(len(S), n, d, params.scale) if gam is None else gam
    return LevelSubproblem(graph, _relaxed(params), "plus", 4, d, gam, top=3, S=S)


def candidate_gammas(n: int, scale: float = 1.0) -> list[int]:
    """``gamma_i = n^{(16-3i)/17} / 2^{i(i+1)/2}`` for the candidates problem."""
    return [scaled(n ** ((16 - 3 * i) / 17) / 2 ** (i * (i + 1) / 2), scale) for i in range(5)]


def candidate_solver(graph: Graph, params: Params, n: int, S: Iterable[int] = (), gam: Sequence[int] | None = None) -> LevelSubproblem:
    gam = candidate_gammas(n, params.scale) if gam is None else gam
    return LevelSubproblem(graph, _relaxed(params), "cand", 4, 0, gam, top=2, S=S, n_hint=n)


# ---------------------------------------------------------------------------
# No-Dense-Case


@dataclass
class SeedRow:
    seeds: list[frozenset[int]]
    solvers: list[LevelSubproblem]


class NoDenseCase(OnlineAlgo):
    tag = "no-dense"

    def __init__(self, graph, params, n: int, ns0, s0: set[int]):
        super().__init__(graph, params)
        self.n = n
        self.ns0 = ns0  # vertex -> current N_{S0}(vertex)
        self.s0 = s0
        sc = params.scale
        self.thr_route = scaled(n ** (12 / 17) / 6400, sc)
        self.ff_budget = scaled(n ** (13 / 17), sc)
        self.ng_thr = scaled(n ** (14 / 17) / 2, sc)
        self.seed_cap = scaled(n ** (15 / 17) / 64, sc)
        self.c_max = n ** (1 / 17)
        self.tff_max = scaled(n ** (16 / 17), sc)
        self.R: list[SeedRow] = []
        self.r_union: set[int] = set()
        self.ff_epoch = 0
        self.ff = FirstFitAlgo(graph, params, budget=self.ff_budget)
        self.tff: list[int] = []
        self.c = 0
        self.cand: LevelSubproblem | None = None
        self.cand_epoch = 0
        self.families: list[tuple[frozenset[int], ...]] = []

    def _color(self, v: int) -> Key:
        key = self._route(v)
        if self.c > self.c_max or len(self.tff) > self.tff_max:
            self._reset_ff()
        return key

    def _route(self, v: int) -> Key:
        nv = self.ns0[v]
        for i, row in enumerate(self.R):
            for j, (seed, solver) in enumerate(zip(row.seeds, row.solvers)):
                if not solver.aborted and len(nv & seed) >= self.thr_route:
                    key = ("3color", i, j, solver.add(v))
                    if all(s.aborted for s in row.solvers):
                        self._abort(AbortCertificate("not-k-colorable", frozenset(), level=(4,)))
                    return key
        tset = set(self.tff)
        if len(self.graph.adj[v] & tset) < self.ff_budget:
            c = self.ff.add(v)
            self.tff.append(v)
            return ("nd-firstfit", self.ff_epoch, c)
        # 1-color candidates on T_FF minus the vertices already well covered by R
        ng = {u for u in self.tff if len(self.ns0[u] & self.r_union) >= self.ng_thr}
        want = [u for u in self.tff if u not in ng]
        if self.cand is None or not self.cand.Sset <= set(want):
            self.cand = candidate_solver(self.graph, self.params, self.n, want)
            self.cand_epoch += 1
        else:
            for u in want:
                if u not in self.cand.Sset:
                    self.cand.add_s(u)
        key = ("cand", self.cand_epoch, self.cand.add(v))
        if self.cand.aborted:
            fam = self.cand.payload or ()
            self.families.append(fam)
            seeds = []
            for A in fam:
                nbr = set()
                for a in A:
                    nbr |= self.graph.adj[a]
                pool = sorted(self.s0 & nbr - self.r_union)
                seeds.append(frozenset(pool[: self.seed_cap]))
            self.R.append(SeedRow(seeds, [color_set_solver(self.graph, self.params, s, self.n, 3) for s in seeds]))
            for s in seeds:
                self.r_union |= s
            self.c += 1
            self.cand = None
        return key

    def _reset_ff(self) -> None:
        self.ff_epoch += 1
        self.ff = FirstFitAlgo(self.graph, self.params, budget=self.ff_budget)
        self.tff = []
        self.c = 0
        self.cand = None

    def surviving_seeds(self) -> list[frozenset[int]]:
        out = []
        for row in self.R:
            alive = [s for s, sol in zip(row.seeds, row.solvers) if not sol.aborted]
            if alive:
                out.append(alive[0])
        return out


# ---------------------------------------------------------------------------
# Division(alpha, beta)


@dataclass
class DenseGroups:
    F: list[set[int]] = field(default_factory=list)
    I: list[set[int]] = field(default_factory=list)
    C: list[int] = field(default_factory=list)
    epoch: int = 0


class DivisionFilter:
    """One ``(alpha, beta)`` filter; ``route`` returns a color key or ``None`` (pass on)."""

    def __init__(self, graph: Graph, params: Params, n: int, alpha: float, beta: float, index: int, ns0, t_a: list[int]):
        self.graph, self.params, self.n = graph, params, n
        self.alpha, self.beta, self.index = alpha, beta, index
        sc = params.scale
        logn = max(1.0, math.log2(n))
        self.common = scaled(n ** beta, sc)
        self.group_min = scaled(n ** alpha, sc)
        self.thr_route = scaled(n ** (beta - 3 / 17) / (8 * logn), sc)
        self.seed_cap = self.common
        self.ns0 = ns0
        self.t_a = t_a
        self.groups = DenseGroups()
        self.R: list[SeedRow] = []
        self.r_union: set[int] = set()
        self.deleted: dict[int, int] = {}
        self.all_groups: list[set[int]] = []
        self.seed_events = 0

    def beta_common(self, u: int, w: int) -> bool:
        return len(self.ns0[u] & self.ns0[w]) >= self.common

    def route(self, v: int) -> Key | None:
        nv = self.ns0[v]
        for i, row in enumerate(self.R):
            for j, (seed, solver) in enumerate(zip(row.seeds, row.solvers)):
                if not solver.aborted and len(nv & seed) >= self.thr_route:
                    return ("2color", self.index, i, j, solver.add(v))
        gone = nv & self.r_union
        if gone:
            self.deleted[v] = self.deleted.get(v, 0) + len(gone)
            self.ns0[v] = nv - gone
        g = self.groups
        for gi, F in enumerate(g.F):
            if any(self.beta_common(v, u) for u in F):
                return self._special(v, gi)
        Fp = {u for u in self.t_a if self.beta_common(u, v)}
        if len(Fp) >= self.group_min:
            g.F.append(Fp)
            g.I.append(set())
            g.C.append(v)
            self.all_groups.append(set(Fp))
            return ("special", self.index, "anchor", v)
        return None

    def _special(self, v: int, gi: int) -> Key:
        g = self.groups
        I = g.I[gi]
        clash = sorted(self.graph.adj[v] & I)
        I.add(v)
        if not clash:
            return ("special", self.index, g.epoch, gi, 1)
        key = ("special", self.index, g.epoch, gi, 2)
        u1, u2 = clash[0], v
        F = sorted(g.F[gi])
        # earliest beta-common member; later deletions may have thinned u1
        w1 = max(F, key=lambda w: (self.beta_common(u1, w), -w))
        w2 = max(F, key=lambda w: (self.beta_common(u2, w), -w))
        c = g.C[gi]
        pairs = [(u1, w1), (w1, c), (c, w2), (w2, u2)]
        seeds = [frozenset(sorted(self.ns0[a] & self.ns0[b])[: self.seed_cap]) for a, b in pairs]
        self.R.append(SeedRow(seeds, [color_set_solver(self.graph, self.params, s, self.n, 2) for s in seeds]))
        for s in seeds:
            self.r_union |= s
        self.seed_events += 1
        self.groups = DenseGroups(epoch=g.epoch + 1)
        return key


def division_pairs(n: int) -> list[tuple[float, float]]:
    """``(alpha_i, beta_i)`` for ``i = 0..Delta`` with ``Delta = log n``, ``K = 2 log log n / log n``."""
    logn = max(2.0, math.log2(n))
    delta = max(1, math.ceil(logn))
    K = 2 * math.log2(logn) / logn
    return [
        (8 / 17 - (2 / 17 + K) * (delta - i) / delta, 14 / 17 - (2 / 17 + K) * i / delta)
        for i in range(delta + 1)
    ]


def is_alpha_beta_free(order: Sequence[int], ns0, n: int, alpha: float, beta: float, scale: float = 1.0) -> bool:
    """Direct check: no ``t`` in ``order`` is beta-common with ``>= n^alpha`` earlier members."""
    common = scaled(n ** beta, scale)
    limit = scaled(n ** alpha, scale)
    for k, t in enumerate(order):
        cnt = sum(1 for u in order[:k] if len(ns0[u] & ns0[t]) >= common)
        if cnt >= limit:
            return False
    return True


# ---------------------------------------------------------------------------
# the whole pipeline


class FourColorerFixed(OnlineAlgo):
    tag = "k4"

    def __init__(self, graph, params, n: int):
        super().__init__(graph, params)
        self.n = n
        self.budget = scaled(2 * n ** (14 / 17), params.scale)
        self.ff = FirstFitAlgo(graph, params, budget=self.budget)
        self.s0: set[int] = set()
        self.ns0: dict[int, frozenset[int]] = {}
        self.t_a: list[int] = []
        self.filters = [DivisionFilter(graph, params, n, a, b, i, self.ns0, self.t_a) for i, (a, b) in enumerate(division_pairs(n))]
        self.no_dense = NoDenseCase(graph, params, n, self.ns0, self.s0)
        self.routing: dict[int, str] = {}

    def _color(self, v: int) -> Key:
        if self.ff.try_color(v) is not None:
            self.s0.add(v)
            self.routing[v] = "S0"
            return ("firstfit", self.ff.add(v))
        # S0 neighbours that arrived before v; later S0-T0 edges are ignored
        self.ns0[v] = frozenset(self.graph.adj[v] & self.s0)
        for flt in self.filters:
            key = flt.route(v)
            if key is not None:
                self.routing[v] = "T_B"
                row_dead = key[0] == "2color" and all(s.aborted for s in flt.R[key[2]].solvers)
                if row_dead:
                    self._abort(AbortCertificate("not-k-colorable", frozenset(), level=(4,)))
                return key
        self.t_a.append(v)
        self.routing[v] = "T_A"
        key = self.no_dense.add(v)
        if self.no_dense.aborted:
            self._abort(self.no_dense.certificate)
        return key

    # audits -----------------------------------------------------------------
    def groups_disjoint(self) -> bool:
        for flt in self.filters:
            seen: set[int] = set()
            for F in flt.groups.F:
                if seen & F:
                    return False
                seen |= F
        return True

    def surviving_3color_seeds_disjoint(self) -> bool:
        seeds = self.no_dense.surviving_seeds()
        seen: set[int] = set()
        for s in seeds:
            if seen & s:
                return False
            seen |= s
        return True

    def seed_sizes_capped(self) -> bool:
        ok = all(len(s) <= self.no_dense.seed_cap for row in self.no_dense.R for s in row.seeds)
        return ok and all(len(s) <= f.seed_cap for f in self.filters for row in f.R for s in row.seeds)

    def alpha_beta_free(self) -> bool:
        return all(is_alpha_beta_free(self.t_a, self.ns0, self.n, f.alpha, f.beta, self.params.scale) for f in self.filters)

    def report(self) -> dict:
        return {
            "deletions": sum(sum(f.deleted.values()) for f in self.filters),
            "groups": sum(len(f.all_groups) for f in self.filters),
            "seeds_2color": sum(len(r.seeds) for f in self.filters for r in f.R),
            "seeds_3color": sum(len(r.seeds) for r in self.no_dense.R),
            "routing": {k: sum(1 for x in self.routing.values() if x == k) for k in ("S0", "T_A", "T_B")},
        }


class FourColorer(DoublingWrapper):
    """The 4-colorable pipeline with ``n`` unknown (doubling on ``n^{14/17}``)."""

    tag = "k4"

    def __init__(self, graph, params):
        super().__init__(graph, params, lambda t: FourColorerFixed(graph, params, t), budget_function(3 / 17))

    @property
    def epochs(self) -> list[FourColorerFixed]:
        return self.inners


def color_4_colorable(stream: ArrivalStream, params: Params | None = None) -> RunResult:
    """Proper coloring always; an inner contradiction switches to fresh unique colors."""
    params = params or Params()
    return run_online(stream, lambda g: FourColorer(g, params), "k4", params)


# ---------------------------------------------------------------------------
# stand-alone drivers over a stream with a designated S side


@dataclass
class SideRun:
    colors: dict[int, Key]
    aborted_at: int | None
    solver: OnlineAlgo

    @property
    def colors_used(self) -> int:
        return len(set(self.colors.values()))


def _drive(stream: ArrivalStream, S: set[int], solver_factory, grow_s: bool) -> SideRun:
    graph = Graph()
    solver = None
    colors: dict[int, Key] = {}
    aborted_at = None
    for i, nb in enumerate(stream.events):
        graph.add_vertex(nb)
        if solver is None:
            solver = solver_factory(graph)
        if i in S:
            if grow_s:
                solver.add_s(i)
            continue
        if solver.aborted:
            break
        colors[i] = solver.add(i)
        if solver.aborted and aborted_at is None:
            aborted_at = i
    if solver is None:
        solver = solver_factory(graph)
    return SideRun(colors, aborted_at, solver)


def solve_3color_set(stream: ArrivalStream, S: Iterable[int], params: Params | None = None, n: int | None = None, gam=None) -> SideRun:
    """``3-Color(S)`` on the non-``S`` vertices; ``gam`` overrides the thresholds."""
    params = params or Params()
    S = set(S)
    n = n or max(stream.n, 1)
    return _drive(stream, S, lambda g: color_set_solver(g, params, S, n, 3, gam), grow_s=False)


def solve_2color_set(stream: ArrivalStream, S: Iterable[int], params: Params | None = None, n: int | None = None, gam=None) -> SideRun:
    params = params or Params()
    S = set(S)
    n = n or max(stream.n, 1)
    return _drive(stream, S, lambda g: color_set_solver(g, params, S, n, 2, gam), grow_s=False)


def one_color_candidates(stream: ArrivalStream, S: Iterable[int], params: Params | None = None, n: int | None = None, gam=None) -> SideRun:
    """1-color candidates problem; ``S`` vertices join the side set as they arrive."""
    params = params or Params()
    n = n or max(stream.n, 1)
    return _drive(stream, set(S), lambda g: candidate_solver(g, params, n, gam=gam), grow_s=True)


def no_dense_case(stream: ArrivalStream, S0: Iterable[int], params: Params | None = None, n: int | None = None) -> tuple[ColoringLedger, NoDenseCase]:
    """No-Dense-Case on the non-``S0`` vertices (``S0`` colored apart with FirstFit)."""
    params = params or Params()
    S0 = set(S0)
    n = n or max(stream.n, 1)
    graph = Graph()
    ns0: dict[int, frozenset[int]] = {}
    nd = NoDenseCase(graph, params, n, ns0, set())
    ff = FirstFitAlgo(graph, params)
    ledger = ColoringLedger()
    for i, nb in enumerate(stream.events):
        graph.add_vertex(nb)
        if i in S0:
            nd.s0.add(i)
            ledger.assign(i, ledger.color_for(("s0", ff.add(i)), "s0"))
            continue
        ns0[i] = frozenset(graph.adj[i] & nd.s0)
        key = nd.add(i)
        ledger.assign(i, ledger.color_for(("nd", key), key[0]))
        if nd.aborted:
            break
    return ledger, nd


def division(alpha: float, beta: float, stream: ArrivalStream, S0: Iterable[int], params: Params | None = None, n: int | None = None) -> tuple[dict[int, str], DivisionFilter]:
    """Route each non-``S0`` vertex to ``T_A`` or ``T_B`` with one filter."""
    params = params or Params()
    S0 = set(S0)
    n = n or max(stream.n, 1)
    graph = Graph()
    ns0: dict[int, frozenset[int]] = {}
    t_a: list[int] = []
    flt = DivisionFilter(graph, params, n, alpha, beta, 0, ns0, t_a)
    s0_now: set[int] = set()
    routing: dict[int, str] = {}
    for i, nb in enumerate(stream.events):
        graph.add_vertex(nb)
        if i in S0:
            s0_now.add(i)
            continue
        ns0[i] = frozenset(graph.adj[i] & s0_now)
        key = flt.route(i)
        if key is None:
            t_a.append(i)
            routing[i] = "T_A"
        else:
            routing[i] = "T_B"
    return routing, flt
