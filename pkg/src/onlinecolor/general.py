"""Deterministic online coloring for locally l-colorable and k-colorable graphs.

Every algorithm here is an :class:`OnlineAlgo`: it owns a subset of the
vertices of a shared, growing :class:`~onlinecolor.core.Graph`, colors each
vertex it is handed, and only looks at edges inside its own vertex set
(plus edges to the fixed side set ``S`` where that applies).  Colors are
hashable keys local to the algorithm; a parent wraps a child's key in a
tuple naming the child, so two children never share a color and a child
restarted with "completely new colors" simply gets a new tag.  The driver
:func:`run_online` turns top-level keys into global colors.

Thresholds follow ``gamma_i = scale * n**(1 - i*eps) / 2**(i*(i-1)/2)``,
floored and clamped to at least 1 so the spawn/abort machinery runs at
small ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .bipartite import LSTColorer
from .core import (
    AbortCertificate,
    ArrivalStream,
    ColoringLedger,
    DEFAULT_ORACLE_CAP,
    Graph,
    chromatic_number,
)

Key = Hashable


@dataclass
class Params:
    scale: float = 1.0
    witness_cap: int = 7  # largest small subgraph searched for chi > d
    witness_budget: int = 4000  # connected subsets examined per search
    oracle_cap: int = DEFAULT_ORACLE_CAP
    eps: float | None = None  # overrides the top-level epsilon only
    improved: bool = False  # k-colorable: eps = 6/(3k(k-1)-2), k4 pipeline at k=4
    check_degree: bool = True


def eps_locally(ell: int) -> float:
    return 2.0 / (ell * (ell - 1) + 2)


def eps_k(k: int, improved: bool = False) -> float:
    if improved and k >= 4:
        return 6.0 / (3 * k * (k - 1) - 2)
    return 2.0 / (k * (k - 1))


def scaled(x: float, scale: float = 1.0) -> int:
    return max(1, math.floor(scale * x + 1e-9))


def gammas(n: int, eps: float, top: int, scale: float = 1.0) -> list[int]:
    """``gamma_0..gamma_{top+1}`` (one spare so ``gamma_{d+2}`` always exists)."""
    return [scaled(n ** (1 - i * eps) / 2 ** (i * (i - 1) / 2), scale) for i in range(top + 3)]


class Aborted(Exception):
    pass


class OnlineAlgo:
    """Base: ``add(v)`` colors ``v`` and returns its key; may set ``aborted``."""

    tag = "algo"

    def __init__(self, graph: Graph, params: Params):
        self.graph = graph
        self.params = params
        self.members: set[int] = set()
        self.order: list[int] = []
        self.aborted = False
        self.certificate: AbortCertificate | None = None
        self.keys: dict[int, Key] = {}

    def add(self, v: int) -> Key:
        if self.aborted:
            raise Aborted(f"{type(self).__name__} already aborted")
        self.members.add(v)
        self.order.append(v)
        key = self._color(v)
        self.keys[v] = key
        return key

    def _color(self, v: int) -> Key:  # pragma: no cover - abstract
        raise NotImplementedError

    def local_neighbors(self, v: int) -> set[int]:
        return self.graph.adj[v] & self.members

    def _abort(self, cert: AbortCertificate | None) -> None:
        self.aborted = True
        self.certificate = cert

    def colors_used(self) -> int:
        return len(set(self.keys.values()))


# ---------------------------------------------------------------------------
# FirstFit and friends


class FirstFitAlgo(OnlineAlgo):
    """Smallest color absent from colored neighbors, within an optional budget."""

    tag = "firstfit"

    def __init__(self, graph: Graph, params: Params | None = None, budget: int | None = None):
        super().__init__(graph, params or Params())
        self.budget = budget
        self.color: dict[int, int] = {}

    def try_color(self, v: int) -> int | None:
        used = {self.color[u] for u in self.graph.adj[v] if u in self.color}
        c = 1
        while c in used:
            c += 1
        if self.budget is not None and c > self.budget:
            return None
        return c

    def _color(self, v: int) -> Key:
        c = self.try_color(v)
        if c is None:
            raise ValueError(f"vertex {v} has no FirstFit color within budget {self.budget}")
        self.color[v] = c
        return c

    def max_color(self) -> int:
        return max(self.color.values(), default=0)


def first_fit(stream: ArrivalStream, palette: int | None = None) -> list[int | None]:
    """FirstFit over the stream; ``None`` marks a vertex with no palette color left.

    Unavailable vertices stay uncolored and do not block later vertices.
    """
    if palette is not None and palette < 1:
        raise ValueError("palette must be nonempty")
    g = Graph()
    ff = FirstFitAlgo(g, budget=palette)
    out: list[int | None] = []
    for nb in stream.events:
        v = g.add_vertex(nb)
        c = ff.try_color(v)
        if c is not None:
            ff.add(v)
        out.append(c)
    return out


class UniqueColors(OnlineAlgo):
    tag = "unique"

    def _color(self, v: int) -> Key:
        return v


class EmptyGraphColorer(OnlineAlgo):
    """Locally 1-colorable: one color; abort on the first edge (``v`` gets color 2)."""

    tag = "locally-1"

    def __init__(self, graph, params, kind: str = "not-locally-colorable"):
        super().__init__(graph, params)
        self.kind = kind

    def _color(self, v: int) -> Key:
        nb = self.local_neighbors(v)
        if nb:
            u = min(nb)
            self._abort(AbortCertificate(self.kind, frozenset({u, v}), level=(1,)))
            return 2
        return 1


class NoVertexColorer(OnlineAlgo):
    """Locally 0-colorable means empty: every vertex is already a witness."""

    tag = "locally-0"

    def _color(self, v: int) -> Key:
        self._abort(AbortCertificate("not-locally-colorable", frozenset({v}), level=(0,)))
        return 0


class DoublingWrapper(OnlineAlgo):
    """Run epoch ``i`` on the next ``t_i`` vertices with a fresh inner algorithm.

    ``t_i`` is the largest ``t`` with ``f(t) <= 2**i``.  Inner aborts
    propagate.
    """

    tag = "doubling"

    def __init__(self, graph, params, factory: Callable[[int], OnlineAlgo], f: Callable[[int], int]):
        super().__init__(graph, params)
        self.factory = factory
        self.f = f
        self.epoch = -1
        self.inner: OnlineAlgo | None = None
        self.left = 0
        self.schedule: list[int] = []
        self.inners: list[OnlineAlgo] = []  # one per epoch, kept for audits

    def _color(self, v: int) -> Key:
        if self.left == 0:
            self.epoch += 1
            t = epoch_length(self.f, self.epoch)
            self.schedule.append(t)
            self.left = t
            self.inner = self.factory(t)
            self.inners.append(self.inner)
        self.left -= 1
        key = self.inner.add(v)
        if self.inner.aborted:
            self._abort(self.inner.certificate)
        return (self.epoch, key)


def epoch_length(f: Callable[[int], int], i: int) -> int:
    """Largest ``t >= 1`` with ``f(t) <= 2**i`` (``f`` nondecreasing, unbounded)."""
    cap = 2 ** i
    if f(1) > cap:
        return 1
    lo, hi = 1, 2
    while f(hi) <= cap:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) <= cap:
            lo = mid
        else:
            hi = mid
    return lo


def with_unknown_n(factory: Callable[[int], OnlineAlgo], f: Callable[[int], int], graph: Graph | None = None, params: Params | None = None) -> DoublingWrapper:
    return DoublingWrapper(graph if graph is not None else Graph(), params or Params(), factory, f)


def budget_function(eps: float) -> Callable[[int], int]:
    return lambda t: math.ceil(t ** (1 - eps) - 1e-12)


# ---------------------------------------------------------------------------
# small-witness search


def find_small_witness(graph: Graph, pool: set[int], v: int, d: int, cap: int, budget: int = 4000, oracle_cap: int = DEFAULT_ORACLE_CAP) -> frozenset[int] | None:
    """Smallest connected ``X`` with ``v in X subset pool``, ``|X| <= cap`` and ``chi(G[X]) > d``.

    Grows connected sets containing ``v`` one vertex at a time, smallest
    first, and gives up after ``budget`` candidate sets.
    """
    if d <= 0:
        return frozenset({v})
    if d == 1:
        nb = graph.adj[v] & pool
        return frozenset({v, min(nb)}) if nb else None
    cap = min(cap, oracle_cap)
    layer = {frozenset({v})}
    seen = 0
    for size in range(2, cap + 1):
        nxt = set()
        for X in layer:
            frontier = set().union(*(graph.adj[u] & pool for u in X)) - X
            for u in frontier:
                nxt.add(X | {u})
        layer = nxt
        if not layer:
            return None
        if size <= d:
            continue
        for X in sorted(layer, key=sorted):
            seen += 1
            if seen > budget:
                return None
            # a (d+1)-critical subgraph has minimum degree >= d
            if any(len(graph.adj[u] & X) < d for u in X):
                continue
            if chromatic_number(X, graph.induced_edges(X), oracle_cap) > d:
                return X
    return None


# ---------------------------------------------------------------------------
# the level-d subproblem (Alg. 2) and its base cases


@dataclass
class Spawn:
    q: int
    seed: frozenset[int]
    child: "LevelSubproblem"


class LevelSubproblem(OnlineAlgo):
    """Level-``d`` subproblem over side set ``S`` and online set ``T``.

    ``mode`` selects the flavour:

    * ``"local"``: locally ``ell``-colorable graphs; aborts return ``X``
      with ``X & S`` not an ``(ell-d)``-color set in any ``ell``-coloring;
    * ``"plus"``: ``k``-colorable graphs (``ell`` plays ``k``); aborts
      carry no witness;
    * ``"cand"``: the 1-color candidates problem (``k = 4``, base level 2);
      aborts return a family of sets of which one is a 1-color set.

    ``top`` is the base level.  ``S`` is either fixed at construction or
    grown with :meth:`add_s`; in both cases it is kept in arrival order.
    """

    tag = "subproblem"

    def __init__(self, graph, params, mode: str, ell: int, d: int, gam: Sequence[int], top: int,
                 S: Iterable[int] = (), n_hint: int | None = None, base_factory=None):
        super().__init__(graph, params)
        self.mode, self.ell, self.d, self.gam, self.top = mode, ell, d, list(gam), top
        self.S: list[int] = sorted(S)
        self.Sset = set(self.S)
        self.n_hint = n_hint
        self.base_factory = base_factory
        self.rows: list[list[Spawn]] = []
        self.Q: list[frozenset[int]] = []
        self.D: set[int] = set()
        self.d_epoch = 0
        self.d_algo: OnlineAlgo | None = None
        self.base: OnlineAlgo | None = None
        self.payload = None  # X (local) or family (cand)
        self.spawn_events = 0

    # S side -----------------------------------------------------------------
    def add_s(self, s: int) -> None:
        self.S.append(s)
        self.Sset.add(s)

    def n_s(self, v: int) -> list[int]:
        return sorted(self.graph.adj[v] & self.Sset)

    # T side -----------------------------------------------------------------
    def _color(self, v: int) -> Key:
        ns = self.n_s(v)
        need = self.gam[self.d + 1]
        if self.params.check_degree and len(ns) < need:
            raise ValueError(f"vertex {v}: |N_S(v)|={len(ns)} < gamma_{self.d + 1}={need}")
        if self.d >= self.top:
            return ("base", self._color_base(v, ns))
        return self._color_alg2(v, ns)

    # base case --------------------------------------------------------------
    def _make_base(self) -> OnlineAlgo:
        if self.base_factory is not None:
            return self.base_factory(self)
        if self.mode == "local":
            return locally_colorer(self.graph, self.params, self.ell - 1)
        if self.mode == "plus":
            return k_colorer(self.graph, self.params, self.ell - 1)
        if self.mode == "cand":
            return OddGirthColorer(self.graph, self.params, n_hint=self.n_hint or 1)
        raise ValueError(self.mode)

    def _color_base(self, v: int, ns: list[int]) -> Key:
        if self.base is None:
            self.base = self._make_base()
        key = self.base.add(v)
        base_members = self.base.members
        if self.mode == "cand":
            cyc = self.base.odd_cycle if isinstance(self.base, OddGirthColorer) else None
            if cyc:
                fam = tuple(frozenset(self.n_s(c)) for c in cyc)
                self._finish(fam, AbortCertificate("candidate-family", frozenset(cyc), frozenset(), (4, self.d), fam))
            return key
        cap = min(self.params.witness_cap, 2 ** (2 ** (self.ell - 1)) - 1)
        XT = find_small_witness(self.graph, base_members, v, self.ell - 1, cap, self.params.witness_budget, self.params.oracle_cap)
        if XT is None and self.base.aborted and self.base.certificate is not None and self.base.certificate.witness:
            XT = self.base.certificate.witness
        if XT is None and self.base.aborted:
            # inner gave up without a usable witness: only abort in plus mode
            if self.mode == "plus":
                self._finish(None, AbortCertificate("not-k-colorable", level=(self.ell, self.d)))
            return key
        if XT is not None:
            if self.mode == "plus":
                self._finish(None, AbortCertificate("not-k-colorable", XT, level=(self.ell, self.d)))
            else:
                XS = {self.n_s(t)[0] for t in XT if self.n_s(t)}
                X = frozenset(XT) | frozenset(XS)
                self._finish(X, AbortCertificate("not-l-color-set", X, frozenset(XS), (self.ell, self.d)))
        return key

    # Alg. 2 -----------------------------------------------------------------
    def _color_alg2(self, v: int, ns: list[int]) -> Key:
        d, gam = self.d, self.gam
        nprime = set(ns[: gam[d + 1]])
        for i, row in enumerate(self.rows):
            for j, sp in enumerate(row):
                if not sp.child.aborted and len(nprime & sp.seed) >= gam[d + 2]:
                    key = ("P", i, j, sp.child.add(v))
                    self._check_rows()
                    return key
        # buffer D with a fresh Locally(d) per epoch
        if self.d_algo is None:
            self.d_algo = locally_colorer(self.graph, self.params, d)
        self.D.add(v)
        key = ("D", self.d_epoch, self.d_algo.add(v))
        cap = min(self.params.witness_cap, 2 ** (2 ** d) - 1)
        Dp = find_small_witness(self.graph, self.D, v, d, cap, self.params.witness_budget, self.params.oracle_cap)
        if Dp is None and self.d_algo.aborted and self.d_algo.certificate is not None:
            Dp = self.d_algo.certificate.witness or None
        if Dp is None and self.d_algo.aborted:
            Dp = frozenset(self.D)  # no witness: fall back to the whole buffer
        if Dp is not None:
            self._spawn(Dp)
        self._check_rows()
        return key

    def _spawn(self, Dp: frozenset[int]) -> None:
        d, gam = self.d, self.gam
        row = []
        for q in sorted(Dp):
            seed = frozenset(self.n_s(q)[: gam[d + 1]])
            child = LevelSubproblem(self.graph, self.params, self.mode, self.ell, d + 1, gam, self.top,
                                    S=seed, n_hint=self.n_hint, base_factory=self.base_factory)
            row.append(Spawn(q, seed, child))
        self.rows.append(row)
        self.Q.append(frozenset(Dp))
        self.spawn_events += 1
        self.D = set()
        self.d_algo = None
        self.d_epoch += 1

    def _check_rows(self) -> None:
        if self.aborted:
            return
        for i, row in enumerate(self.rows):
            if row and all(sp.child.aborted for sp in row):
                if self.mode == "local":
                    X = frozenset().union(*(sp.child.payload for sp in row)) | self.Q[i]
                    self._finish(X, AbortCertificate("not-l-color-set", X, frozenset(X & self.Sset), (self.ell, self.d)))
                elif self.mode == "cand":
                    fam = tuple(a for sp in row for a in sp.child.payload)
                    self._finish(fam, AbortCertificate("candidate-family", frozenset(self.Q[i]), frozenset(), (4, self.d), fam))
                else:
                    self._finish(None, AbortCertificate("not-k-colorable", frozenset(self.Q[i]), level=(self.ell, self.d)))
                return

    def _finish(self, payload, cert: AbortCertificate) -> None:
        self.payload = payload
        self._abort(cert)

    # audits -----------------------------------------------------------------
    def row_representatives(self) -> list[frozenset[int]]:
        reps = []
        for row in self.rows:
            alive = [sp for sp in row if not sp.child.aborted]
            if alive:
                reps.append(alive[0].seed)
        return reps

    def descendants(self) -> Iterable["LevelSubproblem"]:
        yield self
        for row in self.rows:
            for sp in row:
                yield from sp.child.descendants()


# ---------------------------------------------------------------------------
# Locally(l) and Coloring(k)


class FramedColorer(OnlineAlgo):
    """Alg. 1 for a known ``n``: FirstFit within ``gamma_1``, else the level-0 problem."""

    tag = "framework"

    def __init__(self, graph, params, n: int, eps: float, make_else: Callable[[list[int]], LevelSubproblem], kind: str, level: int):
        super().__init__(graph, params)
        self.n = n
        self.gam = gammas(n, eps, level, params.scale)
        self.budget = self.gam[1]
        self.ff = FirstFitAlgo(graph, params, budget=self.budget)
        self.else_problem = make_else(self.gam)
        self.kind, self.level = kind, level

    def _color(self, v: int) -> Key:
        if self.ff.try_color(v) is not None:
            c = self.ff.add(v)
            self.else_problem.add_s(v)
            return ("ff", c)
        key = ("else", self.else_problem.add(v))
        if self.else_problem.aborted:
            sub = self.else_problem.certificate
            X = sub.witness if sub is not None else frozenset()
            self._abort(AbortCertificate(self.kind, X, frozenset(X & self.else_problem.Sset), (self.level, 0)))
        return key


def locally_colorer(graph: Graph, params: Params, ell: int, eps: float | None = None) -> OnlineAlgo:
    """Online algorithm for locally ``ell``-colorable graphs, ``n`` unknown."""
    if ell <= 0:
        return NoVertexColorer(graph, params)
    if ell == 1:
        return EmptyGraphColorer(graph, params)
    e = eps_locally(ell) if eps is None else eps

    def fixed(t: int) -> OnlineAlgo:
        def make_else(gam):
            return LevelSubproblem(graph, params, "local", ell, 0, gam, top=ell - 1)

        return FramedColorer(graph, params, t, e, make_else, "not-locally-colorable", ell)

    return DoublingWrapper(graph, params, fixed, budget_function(e))


def k_colorer(graph: Graph, params: Params, k: int, eps: float | None = None) -> OnlineAlgo:
    """Online algorithm for ``k``-colorable graphs (subproblem+), ``n`` unknown."""
    if k <= 1:
        return EmptyGraphColorer(graph, params, kind="not-k-colorable")
    if k == 2:
        return LSTAlgo(graph, params)
    if k == 4 and params.improved:
        from .k4 import FourColorer

        return FourColorer(graph, params)
    e = eps_k(k, params.improved) if eps is None else eps

    def fixed(t: int) -> OnlineAlgo:
        def make_else(gam):
            return LevelSubproblem(graph, params, "plus", k, 0, gam, top=k - 1)

        return FramedColorer(graph, params, t, e, make_else, "not-k-colorable", k)

    return DoublingWrapper(graph, params, fixed, budget_function(e))


class LSTAlgo(OnlineAlgo):
    """LST89 restricted to this algorithm's own vertices."""

    tag = "lst89"

    def __init__(self, graph, params):
        super().__init__(graph, params)
        self.lst = LSTColorer()
        self.local: dict[int, int] = {}

    def _color(self, v: int) -> Key:
        nb = [self.local[u] for u in self.graph.adj[v] if u in self.local]
        self.local[v] = len(self.local)
        return self.lst.add(nb)


class OddGirthColorer(OnlineAlgo):
    """Online coloring of graphs without 3- or 5-cycles in ``O(sqrt n)`` colors.

    Hubs: a vertex FirstFit cannot color within ``sqrt(n)`` colors starts a
    new class.  Any later vertex adjacent to a neighbor of a hub joins that
    hub's class (second neighborhoods are independent without C3/C5).
    Hubs have disjoint neighborhoods, so there are at most ``sqrt n`` of
    them.  When a triangle or 5-cycle through the new vertex appears the
    vertex gets a fresh color and ``odd_cycle`` records the cycle.
    """

    tag = "odd-girth"

    def __init__(self, graph, params, n_hint: int):
        super().__init__(graph, params)
        self.budget = scaled(math.sqrt(max(1, n_hint)), params.scale)
        self.ff = FirstFitAlgo(graph, params, budget=self.budget)
        self.hubs: list[int] = []
        self.key_of: dict[int, Key] = {}
        self.odd_cycle: tuple[int, ...] | None = None

    def _color(self, v: int) -> Key:
        nb = self.local_neighbors(v)
        cyc = short_odd_cycle(self.graph, self.members, v)
        key: Key | None = None
        if cyc is None:
            for h in self.hubs:
                if h not in nb and nb & self.graph.adj[h]:
                    key = ("hub", h)
                    break
            if key is None:
                if self.ff.try_color(v) is not None:
                    key = ("ff", self.ff.add(v))
                else:
                    self.hubs.append(v)
                    key = ("hub", v)
            if any(self.key_of.get(u) == key for u in nb):
                key = None
        if key is None:
            key = ("fresh", v)
        if cyc is not None:
            self.odd_cycle = cyc
            self._abort(AbortCertificate("not-locally-colorable", frozenset(cyc), level=(2,)))
        self.key_of[v] = key
        return key


def short_odd_cycle(graph: Graph, pool: set[int], v: int) -> tuple[int, ...] | None:
    """A triangle or 5-cycle through ``v`` inside ``pool | {v}``, if any."""
    nb = sorted(graph.adj[v] & pool)
    nbs = set(nb)
    for a in nb:
        common = graph.adj[a] & nbs
        if common:
            return (v, a, min(common))
    for ia, a in enumerate(nb):
        for dd in nb[ia + 1:]:
            for b in sorted(graph.adj[a] & pool - {v, dd}):
                for c in sorted(graph.adj[dd] & pool - {v, a, b}):
                    if c in graph.adj[b]:
                        return (v, a, b, c, dd)
    return None


# ---------------------------------------------------------------------------
# drivers


@dataclass
class RunResult:
    algorithm: str
    ledger: ColoringLedger
    aborts: list[dict] = field(default_factory=list)
    certificate: AbortCertificate | None = None
    abort_index: int | None = None
    params: dict = field(default_factory=dict)
    algo: OnlineAlgo | None = None

    @property
    def colors_used(self) -> int:
        return self.ledger.colors_used

    def report(self, n: int) -> dict:
        return {
            "algorithm": self.algorithm,
            "params": self.params,
            "n": n,
            "colors_used": self.colors_used,
            "per_layer_colors": self.ledger.per_layer_colors(),
            "aborts": self.aborts,
            "certificate": self.certificate.to_json() if self.certificate else None,
        }


def _tag_of(key: Key) -> str:
    while isinstance(key, tuple) and key and isinstance(key[0], int):
        key = key[1]  # doubling epochs
    if isinstance(key, tuple) and key and isinstance(key[0], str):
        return key[0]
    return "main"


def run_online(stream: ArrivalStream, make: Callable[[Graph], OnlineAlgo], name: str, params: Params | None = None,
               fallback: bool = True) -> RunResult:
    """Feed the stream to one algorithm; after an abort, color the rest uniquely."""
    graph = Graph()
    algo = make(graph)
    ledger = ColoringLedger()
    res = RunResult(name, ledger, params=(vars(params).copy() if params else {}), algo=algo)
    for i, nb in enumerate(stream.events):
        graph.add_vertex(nb)
        if res.certificate is not None or res.abort_index is not None:
            if not fallback:
                break
            ledger.assign(i, ledger.fresh("fallback"))
            continue
        key = algo.add(i)
        ledger.assign(i, ledger.color_for(("algo", key), _tag_of(key)))
        if algo.aborted:
            res.abort_index = i
            res.certificate = algo.certificate
            res.aborts.append({"vertex": i, "kind": algo.certificate.kind if algo.certificate else "abort"})
    return res


def color_locally_l(stream: ArrivalStream, ell: int, params: Params | None = None) -> RunResult:
    params = params or Params()
    return run_online(stream, lambda g: locally_colorer(g, params, ell, params.eps), f"locally-{ell}", params)


def color_k_colorable(stream: ArrivalStream, k: int, params: Params | None = None) -> RunResult:
    params = params or Params()
    return run_online(stream, lambda g: k_colorer(g, params, k, params.eps), f"k-colorable-{k}", params)


def competitive_ell(n: int) -> int:
    """``floor(log2 log2 n / 2)``, raised to 2 so desk-scale runs do something."""
    if n < 4:
        return 2
    return max(2, int(math.log2(math.log2(n)) / 2))


def competitive_wrapper(stream: ArrivalStream, params: Params | None = None, ell: int | None = None) -> RunResult:
    params = params or Params()
    ell = competitive_ell(max(stream.n, 1)) if ell is None else ell
    res = run_online(stream, lambda g: locally_colorer(g, params, ell), f"competitive-{ell}", params)
    return res


def run_first_fit(stream: ArrivalStream, palette: int | None = None) -> RunResult:
    return run_online(stream, lambda g: FirstFitAlgo(g, Params(), budget=None), "firstfit")


def run_doubling_first_fit(stream: ArrivalStream, f: Callable[[int], int]) -> tuple[RunResult, list[int]]:
    """Doubling wrapper around FirstFit; returns the run and colors used after each prefix."""
    graph = Graph()
    params = Params()
    algo = DoublingWrapper(graph, params, lambda t: FirstFitAlgo(graph, params), f)
    ledger = ColoringLedger()
    prefix_colors = []
    for i, nb in enumerate(stream.events):
        graph.add_vertex(nb)
        ledger.assign(i, ledger.color_for(algo.add(i), "doubling"))
        prefix_colors.append(ledger.colors_used)
    return RunResult("doubling-firstfit", ledger, algo=algo), prefix_colors
