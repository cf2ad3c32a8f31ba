"""Online coloring of bipartite graphs by component levels.

``lst89`` keeps every connected component *matched*: a level-``l``
component uses colors ``1..2l`` and its top colors ``2l-1, 2l`` sit on
opposite sides of the component's bipartition.  A new vertex either gets
the top color that keeps its merged component matched, or the component is
promoted to level ``l+1`` with a new top color.  ``randomized_lst`` flips
a fair coin for the color of isolated vertices and of promotions.

Components live in a union-find with parity bits (parity = side of the
bipartition relative to the root).  Each root stores its level, the parity
of its color-``2l-1`` class, and whether an odd cycle was closed inside
it.  An odd component can never be matched, so any vertex touching one
promotes.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .core import ArrivalStream, ColoringLedger

Coin = Callable[[], int]


class _Components:
    def __init__(self):
        self.parent: list[int] = []
        self.par: list[int] = []  # parity relative to parent
        self.size: list[int] = []
        self.level: dict[int, int] = {}
        self.odd_parity: dict[int, int] = {}  # parity of the color-(2l-1) class
        self.odd_cycle: dict[int, bool] = {}

    def add(self) -> int:
        v = len(self.parent)
        self.parent.append(v)
        self.par.append(0)
        self.size.append(1)
        return v

    def find(self, v: int) -> tuple[int, int]:
        path = []
        while self.parent[v] != v:
            path.append(v)
            v = self.parent[v]
        root = v
        # compress, accumulating parity from the top down
        acc = 0
        for u in reversed(path):
            acc ^= self.par[u]
            self.par[u] = acc
            self.parent[u] = root
        return root, (self.par[path[0]] if path else 0)

    def parity(self, v: int) -> int:
        return self.find(v)[1]


@dataclass
class BipartiteRun:
    ledger: ColoringLedger
    colors: list[int]
    levels: list[int]
    seed: int | None = None
    coins: int = 0

    @property
    def colors_used(self) -> int:
        return len(set(self.colors))

    @property
    def max_color(self) -> int:
        return max(self.colors, default=0)

    @property
    def max_level(self) -> int:
        return max(self.levels, default=0)

    def level_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(self.levels).items()))

    def report(self) -> dict:
        return {
            "colors": self.colors_used,
            "max_color": self.max_color,
            "max_level": self.max_level,
            "level_histogram": self.level_histogram(),
            "seed": self.seed,
        }


class LSTColorer:
    """Incremental LST-style colorer; ``coin`` = None gives the deterministic version."""

    def __init__(self, coin: Coin | None = None):
        self.coin = coin
        self.uf = _Components()
        self.colors: list[int] = []
        self.levels: list[int] = []
        self.coins = 0

    def _flip(self) -> int:
        if self.coin is None:
            return 0
        self.coins += 1
        return self.coin()

    def add(self, nbrs) -> int:
        uf = self.uf
        v = uf.add()
        # neighbor parities grouped by component root
        roots: dict[int, set[int]] = {}
        for u in nbrs:
            r, p = uf.find(u)
            roots.setdefault(r, set()).add(p)
        if not roots:
            color = 1 + self._flip()
            uf.level[v] = 1
            uf.odd_parity[v] = 0 if color == 1 else 1
            uf.odd_cycle[v] = False
            self.colors.append(color)
            self.levels.append(1)
            return color

        top = max(uf.level[r] for r in roots)
        need: set[int] = set()  # parity v must have w.r.t. color 2*top-1 class, per top component
        matched = True
        for r, ps in roots.items():
            if len(ps) > 1 or uf.odd_cycle[r]:
                matched = False
                continue
            if uf.level[r] == top:
                (p,) = ps
                # v sits at parity 1-p; it gets color 2top-1 iff that equals the class parity
                need.add(int((1 - p) == uf.odd_parity[r]))
        if matched and len(need) == 1:
            color = 2 * top - 1 if need.pop() else 2 * top
            level = top
        else:
            color = 2 * top + 1 + self._flip()
            level = top + 1

        # union everything into v's component
        odd = any(uf.odd_cycle[r] or len(ps) > 1 for r, ps in roots.items())
        for r, ps in roots.items():
            p = min(ps)
            # v's parity relative to r's root frame is 1-p
            self._link(v, r, 1 - p)
        root, pv = uf.find(v)
        for r in list(roots) + [v]:
            if r != root:
                uf.level.pop(r, None)
                uf.odd_parity.pop(r, None)
                uf.odd_cycle.pop(r, None)
        uf.level[root] = level
        uf.odd_cycle[root] = odd
        # class 2l-1 parity in the new root's frame
        v_is_odd_color = color % 2 == 1
        uf.odd_parity[root] = pv if v_is_odd_color else 1 - pv
        self.colors.append(color)
        self.levels.append(level)
        return color

    def _link(self, v: int, r: int, v_par_in_r: int) -> None:
        """Merge component of ``v`` with root ``r``; ``v`` has parity ``v_par_in_r`` in r's frame."""
        uf = self.uf
        rv, pv = uf.find(v)
        if rv == r:
            return
        rel = pv ^ v_par_in_r  # parity of r's frame relative to rv's frame
        if uf.size[rv] < uf.size[r]:
            rv, r = r, rv
        uf.parent[r] = rv
        uf.par[r] = rel
        uf.size[rv] += uf.size[r]

    # audits --------------------------------------------------------------
    def components(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for v in range(len(self.colors)):
            out.setdefault(self.uf.find(v)[0], []).append(v)
        return out

    def is_matched(self, root: int, members: Sequence[int]) -> bool:
        uf = self.uf
        if uf.odd_cycle[root]:
            return False
        lvl = uf.level[root]
        for v in members:
            c = self.colors[v]
            if c > 2 * lvl:
                return False
            if c == 2 * lvl - 1 and uf.parity(v) != uf.odd_parity[root]:
                return False
            if c == 2 * lvl and uf.parity(v) == uf.odd_parity[root]:
                return False
        return True


def _run(stream: ArrivalStream, coin: Coin | None, seed=None) -> BipartiteRun:
    col = LSTColorer(coin)
    ledger = ColoringLedger()
    tag = "lst" if coin is None else "randomized-lst"
    for i, nb in enumerate(stream.events):
        c = col.add(nb)
        ledger.assign(i, ledger.color_for(c, tag))
    return BipartiteRun(ledger, col.colors, col.levels, seed, col.coins)


def lst89(stream: ArrivalStream) -> BipartiteRun:
    """Deterministic level algorithm; at most ``2 log2(n+1)`` colors."""
    return _run(stream, None)


def randomized_lst(stream: ArrivalStream, seed: int) -> BipartiteRun:
    rng = random.Random(seed)
    return _run(stream, lambda: rng.getrandbits(1), seed)


class _NeedCoin(Exception):
    pass


def enumerate_coin_outcomes(stream: ArrivalStream) -> Iterator[tuple[tuple[int, ...], BipartiteRun]]:
    """Run ``randomized_lst`` once per full coin sequence (each of prob ``2**-len``)."""
    stack: list[tuple[int, ...]] = [()]
    while stack:
        prefix = stack.pop()
        it = iter(prefix)

        def coin():
            try:
                return next(it)
            except StopIteration:
                raise _NeedCoin from None

        try:
            run = _run(stream, coin)
        except _NeedCoin:
            stack.append(prefix + (1,))
            stack.append(prefix + (0,))
            continue
        yield prefix, run


def exact_randomized_levels(stream: ArrivalStream) -> dict[tuple[int, ...], "Fraction"]:
    """Exact distribution of the level vector of ``randomized_lst``."""
    from fractions import Fraction

    dist: dict[tuple[int, ...], Fraction] = {}
    for coins, run in enumerate_coin_outcomes(stream):
        key = tuple(run.levels)
        dist[key] = dist.get(key, Fraction(0)) + Fraction(1, 2 ** len(coins))
    return dist


def gen_lst89_adversary(h: int) -> ArrivalStream:
    """Fixed instance built against the deterministic algorithm.

    Starts from ``2**h`` disjoint edges and merges components in pairs for
    ``h`` rounds.  Each merge vertex is attached to one vertex of each
    component, on the sides that make ``lst89`` need two different top
    colors, so every merge promotes; a pendant vertex on it then takes the
    other new top color.  The instance is fixed before any
    coin is tossed, so ``randomized_lst`` meets it as an oblivious input.
    """
    if h < 0:
        raise ValueError("h must be >= 0")
    col = LSTColorer()
    events: list[list[int]] = []

    def arrive(nb: list[int]) -> int:
        events.append(sorted(nb))
        col.add(nb)
        return len(events) - 1

    comps: list[list[int]] = []
    for _ in range(2 ** h):
        a = arrive([])
        b = arrive([a])
        comps.append([a, b])
    uf = col.uf
    for _ in range(h):
        nxt = []
        for A, B in zip(comps[::2], comps[1::2]):
            picks = []
            for members, want in ((A, 1), (B, 0)):
                root = uf.find(members[0])[0]
                # want = 1: v must take color 2l-1 next to this vertex
                u = next(x for x in members if int((1 - uf.parity(x)) == uf.odd_parity[root]) == want)
                picks.append(u)
            v = arrive(picks)
            w = arrive([v])  # pendant: brings out the second top color
            nxt.append(A + B + [v, w])
        comps = nxt
    return ArrivalStream(events, {"generator": "lst89-adversary", "h": h})
