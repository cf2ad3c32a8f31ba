"""Online instances, coloring bookkeeping, small-graph oracles and generators.

An online instance is an :class:`ArrivalStream`: vertex ``i`` arrives with
edges to some of ``0..i-1``.  Algorithms write colors into a
:class:`ColoringLedger`, which hands out fresh colors per layer tag so that
different algorithm layers never share a color.

The oracles (``chromatic_number``, ``is_l_color_set``) are exhaustive and
only meant for witness-sized graphs; they refuse inputs above ``cap``.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

DEFAULT_ORACLE_CAP = 12


class StreamError(ValueError):
    """Malformed arrival stream."""


class OracleTooLarge(ValueError):
    """Brute-force oracle asked to handle more vertices than its cap."""


# ---------------------------------------------------------------------------
# streams


@dataclass
class ArrivalStream:
    """Vertex ``i`` arrives with back-edges ``events[i]`` (ids < i)."""

    events: list[frozenset[int]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.events = [frozenset(e) for e in self.events]
        self.validate()

    def validate(self) -> None:
        for i, nb in enumerate(self.events):
            for j in nb:
                if not (isinstance(j, int) and 0 <= j < i):
                    raise StreamError(f"event {i} has neighbor {j!r} not strictly earlier")

    @property
    def n(self) -> int:
        return len(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def edges(self) -> list[tuple[int, int]]:
        return [(j, i) for i, nb in enumerate(self.events) for j in sorted(nb)]

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in self.events]
        for i, nb in enumerate(self.events):
            for j in nb:
                adj[i].add(j)
                adj[j].add(i)
        return adj

    def prefix(self, m: int) -> "ArrivalStream":
        return ArrivalStream(self.events[:m], dict(self.meta))

    def induced(self, vertices: Iterable[int]) -> "ArrivalStream":
        """Sub-stream on ``vertices`` (relabelled 0.. in arrival order)."""
        vs = sorted(set(vertices))
        idx = {v: k for k, v in enumerate(vs)}
        return ArrivalStream([frozenset(idx[j] for j in self.events[v] if j in idx) for v in vs], {})

    # serialization ---------------------------------------------------------
    def to_json(self) -> str:
        doc = {"n": self.n, "events": [sorted(e) for e in self.events], "meta": self.meta}
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ArrivalStream":
        doc = json.loads(text)
        events = doc["events"]
        if "n" in doc and doc["n"] != len(events):
            raise StreamError(f"declared n={doc['n']} but {len(events)} events")
        return cls([frozenset(e) for e in events], dict(doc.get("meta") or {}))

    def to_text(self) -> str:
        return "".join(f"{i}: {' '.join(map(str, sorted(e)))}".rstrip() + "\n" for i, e in enumerate(self.events))

    @classmethod
    def from_text(cls, text: str) -> "ArrivalStream":
        events = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            head, _, rest = line.partition(":")
            if int(head) != len(events):
                raise StreamError(f"expected vertex {len(events)}, got {head}")
            events.append(frozenset(int(t) for t in rest.split()))
        return cls(events)


class Graph:
    """Incrementally built undirected graph on vertex ids 0..n-1."""

    def __init__(self):
        self.adj: list[set[int]] = []

    def add_vertex(self, nbrs: Iterable[int]) -> int:
        v = len(self.adj)
        nb = set(nbrs)
        self.adj.append(nb)
        for u in nb:
            self.adj[u].add(v)
        return v

    def __len__(self) -> int:
        return len(self.adj)

    def neighbors(self, v: int) -> set[int]:
        return self.adj[v]

    def induced_edges(self, vertices: Iterable[int]) -> list[tuple[int, int]]:
        vs = set(vertices)
        return [(u, w) for u in vs for w in self.adj[u] if w in vs and u < w]


# ---------------------------------------------------------------------------
# coloring ledger


@dataclass
class ColoringLedger:
    """Vertex -> positive color, with every color owned by exactly one layer tag.

    Colors are drawn from one global counter, so the color sets of distinct
    tags are disjoint by construction; ``layers`` records, per tag, the
    colors it was handed (reported as ranges by :meth:`layer_ranges`).
    """

    assignment: dict[int, int] = field(default_factory=dict)
    layers: dict[str, list[int]] = field(default_factory=dict)
    _next: int = 1
    _keys: dict = field(default_factory=dict)

    def fresh(self, tag: str) -> int:
        c = self._next
        self._next += 1
        self.layers.setdefault(tag, []).append(c)
        return c

    def color_for(self, key: Hashable, tag: str) -> int:
        """Stable global color for an algorithm-local color ``key``."""
        c = self._keys.get(key)
        if c is None:
            c = self._keys[key] = self.fresh(tag)
        return c

    def assign(self, v: int, color: int) -> None:
        if color < 1:
            raise ValueError("colors are positive integers")
        self.assignment[v] = color

    @property
    def colors_used(self) -> int:
        return len(set(self.assignment.values()))

    def per_layer_colors(self) -> dict[str, int]:
        used = set(self.assignment.values())
        return {t: sum(1 for c in cs if c in used) for t, cs in sorted(self.layers.items())}

    def layer_ranges(self) -> dict[str, tuple[int, int]]:
        return {t: (min(cs), max(cs) + 1) for t, cs in sorted(self.layers.items()) if cs}

    def layers_disjoint(self) -> bool:
        seen: set[int] = set()
        for cs in self.layers.values():
            if seen.intersection(cs):
                return False
            seen.update(cs)
        return True


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: tuple[int, int] | None = None
    missing: tuple[int, ...] = ()

    @property
    def status(self) -> str:
        if self.missing:
            return "incomplete"
        return "ok" if self.ok else "violation"


def validate_coloring(stream: ArrivalStream, ledger: ColoringLedger | dict[int, int], upto: int | None = None) -> ValidationReport:
    """Check that the first ``upto`` vertices are colored and no edge is monochromatic."""
    col = ledger.assignment if isinstance(ledger, ColoringLedger) else ledger
    m = stream.n if upto is None else upto
    missing = tuple(v for v in range(m) if v not in col)
    if missing:
        return ValidationReport(False, None, missing)
    for i in range(m):
        for j in sorted(stream.events[i]):
            if col[i] == col[j]:
                return ValidationReport(False, (j, i))
    return ValidationReport(True)


@dataclass
class AbortCertificate:
    """Why an algorithm gave up.

    kind is one of ``not-locally-colorable`` (``chi(G[X]) > l``),
    ``not-l-color-set`` (``X & S`` is not an ``(l-d)``-color set in any
    ``l``-coloring of ``G[X]``), ``candidate-family`` (``family`` lists
    sets of which one must be a 1-color set) or ``not-k-colorable`` (no
    witness required).
    """

    kind: str
    witness: frozenset[int] = frozenset()
    s_part: frozenset[int] = frozenset()
    level: tuple[int, ...] = ()
    family: tuple[frozenset[int], ...] = ()

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "witness": sorted(self.witness),
            "s_part": sorted(self.s_part),
            "level": list(self.level),
            "family": [sorted(a) for a in self.family],
        }


def verify_certificate(cert: AbortCertificate, adj: Sequence[set[int]], cap: int = DEFAULT_ORACLE_CAP) -> bool | None:
    """Oracle check of a certificate; ``None`` if the witness exceeds ``cap``."""
    X = sorted(cert.witness)
    if len(X) > cap:
        return None
    edges = [(u, w) for u in X for w in adj[u] if w in cert.witness and u < w]
    if cert.kind == "not-locally-colorable":
        (ell,) = cert.level[:1]
        return chromatic_number(X, edges, cap) > ell
    if cert.kind == "not-l-color-set":
        ell, d = cert.level
        return not is_l_color_set(X, edges, cert.s_part & cert.witness, ell, ell - d, cap)
    return None


# ---------------------------------------------------------------------------
# oracles


def _prep(vertices: Iterable[int], edges: Iterable[tuple[int, int]], cap: int):
    vs = list(dict.fromkeys(vertices))
    if len(vs) > cap:
        raise OracleTooLarge(f"{len(vs)} vertices exceeds oracle cap {cap}")
    idx = {v: k for k, v in enumerate(vs)}
    nb = [set() for _ in vs]
    for u, w in edges:
        if u in idx and w in idx and u != w:
            nb[idx[u]].add(idx[w])
            nb[idx[w]].add(idx[u])
    return vs, idx, nb


def _colorable(nb: list[set[int]], allowed: list[int]) -> bool:
    """Backtracking: can vertex i take a color < allowed[i], properly?

    Vertices with the widest choice go last; a brand-new color is only
    tried once (the smallest unused index), which removes color symmetry
    among the colors no vertex is restricted from.
    """
    n = len(nb)
    if n == 0:
        return True
    if min(allowed) <= 0:
        return False
    order = sorted(range(n), key=lambda i: (allowed[i], -len(nb[i])))
    col = [-1] * n
    restricted = max(allowed) if len(set(allowed)) > 1 else 0

    def go(k: int, used: int) -> bool:
        if k == n:
            return True
        v = order[k]
        bad = {col[u] for u in nb[v] if col[u] >= 0}
        top = min(allowed[v], max(used, restricted) + 1)
        for c in range(top):
            if c in bad:
                continue
            col[v] = c
            if go(k + 1, max(used, c + 1)):
                return True
        col[v] = -1
        return False

    return go(0, 0)


def chromatic_number(vertices: Iterable[int], edges: Iterable[tuple[int, int]], cap: int = DEFAULT_ORACLE_CAP) -> int:
    vs, _, nb = _prep(vertices, edges, cap)
    if not vs:
        return 0
    for k in range(1, len(vs) + 1):
        if _colorable(nb, [k] * len(vs)):
            return k
    return len(vs)


def chromatic_number_unpruned(vertices: Iterable[int], edges: Iterable[tuple[int, int]], cap: int = 9) -> int:
    """Second oracle: try every assignment in ``range(k)**n``."""
    vs, _, nb = _prep(vertices, edges, cap)
    n = len(vs)
    if n == 0:
        return 0
    pairs = [(i, j) for i in range(n) for j in nb[i] if i < j]
    for k in range(1, n + 1):
        for assign in itertools.product(range(k), repeat=n):
            if all(assign[i] != assign[j] for i, j in pairs):
                return k
    return n


def is_l_color_set(vertices, edges, S, k: int, l: int, cap: int = DEFAULT_ORACLE_CAP) -> bool:
    """Does some proper ``k``-coloring use at most ``l`` colors on ``S``?

    After relabelling colors, such a coloring may be assumed to put ``S``
    into colors ``0..l-1``, which is what the search enforces.
    """
    vs, idx, nb = _prep(vertices, edges, cap)
    if l >= k:
        return _colorable(nb, [k] * len(vs))
    allowed = [max(0, min(l, k)) if v in S else k for v in vs]
    if any(a == 0 for a in allowed):
        return False
    return _colorable(nb, allowed)


# ---------------------------------------------------------------------------
# generators


def gen_firstfit_adversary(n: int) -> ArrivalStream:
    """Crown-style stream on which FirstFit needs ``n/2`` colors.

    Pairs ``(a_i, b_i)`` arrive in order; ``a_i`` sees every earlier
    ``b_j`` and ``b_i`` every earlier ``a_j``.  FirstFit then gives both
    members of pair ``i`` color ``i+1``.  The ``a``'s and the ``b``'s are
    the two sides of a bipartition.
    """
    if n < 2 or n % 2:
        raise ValueError("n must be an even integer >= 2")
    events = []
    for i in range(n // 2):
        events.append(frozenset(2 * j + 1 for j in range(i)))
        events.append(frozenset(2 * j for j in range(i)))
    return ArrivalStream(events, {"generator": "firstfit-adversary", "n": n, "k": 2, "sides": [v % 2 for v in range(n)]})


def gen_random_k_colorable(n: int, k: int, density: float, seed: int) -> ArrivalStream:
    """Planted ``k``-partition, cross-part edges with probability ``density``."""
    if k < 1 or not 0.0 <= density <= 1.0:
        raise ValueError("need k >= 1 and density in [0, 1]")
    rng = random.Random(seed)
    parts = [i % k for i in range(n)]
    rng.shuffle(parts)
    events = []
    for i in range(n):
        events.append(frozenset(j for j in range(i) if parts[j] != parts[i] and rng.random() < density))
    return ArrivalStream(events, {"generator": "random-k-colorable", "k": k, "density": density, "seed": seed, "planted": parts})


def gen_random_tree(n: int, seed: int) -> ArrivalStream:
    """Random recursive tree (each vertex attaches to a uniform earlier one)."""
    rng = random.Random(seed)
    events = [frozenset()] + [frozenset([rng.randrange(i)]) for i in range(1, n)]
    return ArrivalStream(events, {"generator": "random-tree", "k": 2, "seed": seed})


def gen_random_bipartite(n: int, density: float, seed: int) -> ArrivalStream:
    s = gen_random_k_colorable(n, 2, density, seed)
    s.meta["generator"] = "random-bipartite"
    return s


def gen_grade_instance(h: int, seed: int) -> ArrivalStream:
    """The grade-``h`` random bipartite instance (``4*2**h - 2`` vertices).

    Phase 0 brings ``2**h`` disjoint edges.  Phase ``i`` merges the current
    components in uniformly random pairs; each merge adds ``v_a`` (joined to
    one random side of each component) and then ``v_b`` (joined to the other
    sides and to ``v_a``).
    """
    if h < 0:
        raise ValueError("h must be >= 0")
    rng = random.Random(seed)
    events: list[frozenset[int]] = []
    comps: list[tuple[list[int], list[int]]] = []
    for _ in range(2 ** h):
        a = len(events)
        events.append(frozenset())
        events.append(frozenset([a]))
        comps.append(([a], [a + 1]))
    while len(comps) > 1:
        rng.shuffle(comps)
        nxt = []
        for c1, c2 in zip(comps[0::2], comps[1::2]):
            sides1 = c1 if rng.random() < 0.5 else (c1[1], c1[0])
            sides2 = c2 if rng.random() < 0.5 else (c2[1], c2[0])
            va = len(events)
            events.append(frozenset(sides1[0]) | frozenset(sides2[0]))
            events.append(frozenset(sides1[1]) | frozenset(sides2[1]) | {va})
            # va sits opposite the sides it touches
            nxt.append((list(sides1[1]) + list(sides2[1]) + [va], list(sides1[0]) + list(sides2[0]) + [va + 1]))
        comps = nxt
    return ArrivalStream(events, {"generator": "grade", "h": h, "seed": seed, "k": 2})


def gen_tree_merge_instance(parent: Sequence[int], seed: int = 0) -> ArrivalStream:
    """Stream whose component-merge forest is the given forest.

    ``parent[v]`` is the parent of ``v`` (``-1`` for roots) and must exceed
    ``v``.  Vertex ``v`` arrives joined to one vertex (chosen with the seeded
    RNG) of each child's component, so children's components merge exactly
    at ``v``.
    """
    n = len(parent)
    children: list[list[int]] = [[] for _ in range(n)]
    for v, p in enumerate(parent):
        if p == -1:
            continue
        if not (isinstance(p, int) and v < p < n):
            raise ValueError(f"vertex {v} has invalid parent {p!r}")
        children[p].append(v)
    rng = random.Random(seed)
    members: list[list[int]] = [[] for _ in range(n)]
    events = []
    for v in range(n):
        nb = set()
        comp = [v]
        for c in children[v]:
            nb.add(rng.choice(members[c]))
            comp.extend(members[c])
        members[v] = comp
        events.append(frozenset(nb))
    return ArrivalStream(events, {"generator": "tree-merge", "parent": list(parent), "seed": seed, "k": 2})


def planted_is_proper(stream: ArrivalStream) -> bool:
    parts = stream.meta.get("planted")
    return parts is not None and all(parts[i] != parts[j] for j, i in stream.edges())
