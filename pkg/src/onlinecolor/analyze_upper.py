"""Level analysis of the randomized bipartite algorithm.

Two halves live here:

* exact, small-scale machinery on rooted forests (sampling levels, exact
  dyadic level distributions, expected level-2 terminal counts, the closed
  form for the level-2 growth constant), used as oracles;
* the fixed-denominator dynamic programs ``p'`` and ``b'`` whose values are
  rounded *outward* onto the grid ``1/D`` so that every stored entry is an
  upper bound of the exact recurrence value.  ``gamma_upper_bound`` turns
  a ``b'`` table into the growth constant and the colour coefficient.

Fixed-point numbers are stored as integer numerators over a shared
denominator ``D`` (a power of two).  All tables are numpy ``int64`` arrays;
products of two grid values stay below ``2**62`` for ``D <= 2**30`` and
values in ``[0, 1]``, and ``b'`` numerators stay far below ``2**63`` for
every table size used here.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

DEFAULT_LOG2_DENOMINATOR = 30
DEFAULT_FOREST_CAP = 64
MAX_LOG2_DENOMINATOR = 30


class ForestError(ValueError):
    """Raised for malformed forests."""


class ForestTooLarge(ValueError):
    """Raised when an exact computation is asked for a forest above its cap."""


# --------------------------------------------------------------------------
# rooted forests
# --------------------------------------------------------------------------


@dataclass
class RootedForest:
    """A rooted forest on vertices ``0..n-1`` with every child below its parent.

    ``parent[v]`` is ``-1`` for roots.  This is the merge forest of an
    arrival stream: vertex ``i`` is the component created when vertex ``i``
    arrived, and its children are the components it swallowed.
    """

    parent: list[int]
    children: list[list[int]] = field(init=False)
    leaf_count: list[int] = field(init=False)

    def __post_init__(self) -> None:
        n = len(self.parent)
        self.children = [[] for _ in range(n)]
        for v, p in enumerate(self.parent):
            if p == -1:
                continue
            if not (isinstance(p, int) and v < p < n):
                raise ForestError(f"vertex {v} has invalid parent {p!r}")
            self.children[p].append(v)
        self.leaf_count = [0] * n
        for v in range(n):
            kids = self.children[v]
            self.leaf_count[v] = sum(self.leaf_count[c] for c in kids) if kids else 1

    @classmethod
    def from_children(cls, children: Sequence[Sequence[int]]) -> "RootedForest":
        parent = [-1] * len(children)
        for v, kids in enumerate(children):
            for c in kids:
                if not 0 <= c < len(children) or parent[c] != -1:
                    raise ForestError(f"child {c} of {v} is out of range or shared")
                parent[c] = v
        return cls(parent)

    def __len__(self) -> int:
        return len(self.parent)

    @property
    def roots(self) -> list[int]:
        return [v for v, p in enumerate(self.parent) if p == -1]

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]

    def is_binary(self) -> bool:
        return all(len(k) in (0, 2) for k in self.children)


def binary_trees(leaves: int) -> Iterator[RootedForest]:
    """All binary tree shapes with ``leaves`` leaves, children numbered first.

    Left/right mirror images are both produced; callers that only need
    distinct shapes can deduplicate on :func:`tree_shape`.
    """

    def shapes(k: int):
        if k == 1:
            yield ()
            return
        for left in range(1, k):
            for ls in shapes(left):
                for rs in shapes(k - left):
                    yield (ls, rs)

    for shape in shapes(leaves):
        yield _forest_from_shape(shape)


def _forest_from_shape(shape) -> RootedForest:
    children: list[list[int]] = []

    def build(s) -> int:
        kids = [build(c) for c in s]
        children.append(kids)
        return len(children) - 1

    build(shape)
    return RootedForest.from_children(children)


def tree_shape(forest: RootedForest, v: int):
    """Unordered shape of the subtree at ``v`` as a nested sorted tuple."""
    return tuple(sorted(tree_shape(forest, c) for c in forest.children[v]))


def rooted_forests(max_leaves: int, allow_unary: bool = True) -> Iterator[RootedForest]:
    """Every rooted forest whose trees have arbitrary arity, up to ``max_leaves`` leaves.

    Unary vertices (when allowed) are capped at one per chain link so the
    enumeration stays finite: a vertex with one child repeats its child's
    level, so longer unary chains add no new behaviour.  Forests are
    enumerated up to isomorphism of unordered trees, with the vertex
    numbering produced by a post-order walk.
    """
    trees_by_leaves: dict[int, list] = {k: [] for k in range(1, max_leaves + 1)}
    seen: set = set()

    def add(k: int, shape) -> None:
        if shape not in seen:
            seen.add(shape)
            trees_by_leaves[k].append(shape)

    for k in range(1, max_leaves + 1):
        if k == 1:
            add(1, ())
        # multisets of >= 2 subtrees with total k leaves
        for parts in _partitions(k):
            if len(parts) < 2:
                continue
            pools = [trees_by_leaves[p] for p in parts]
            for combo in itertools.product(*pools):
                add(k, tuple(sorted(combo)))
        # a unary vertex above any tree whose root is not unary
        for shape in list(trees_by_leaves[k]) if allow_unary else ():
            if len(shape) != 1:
                add(k, (shape,))

    tree_list = [(k, s) for k in range(1, max_leaves + 1) for s in trees_by_leaves[k]]
    index = {s: i for i, (_, s) in enumerate(tree_list)}
    for total in range(1, max_leaves + 1):
        for parts in _partitions(total):
            pools = [[s for s in trees_by_leaves[p]] for p in parts]
            combos = set()
            for combo in itertools.product(*pools):
                combos.add(tuple(sorted(combo, key=lambda s: index[s])))
            for combo in sorted(combos, key=lambda c: [index[s] for s in c]):
                yield _forest_from_shapes(combo)


def _partitions(n: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def _forest_from_shapes(shapes) -> RootedForest:
    children: list[list[int]] = []

    def build(s) -> int:
        kids = [build(c) for c in s]
        children.append(kids)
        return len(children) - 1

    for s in shapes:
        build(s)
    return RootedForest.from_children(children)


# --------------------------------------------------------------------------
# level sampling and exact distributions
# --------------------------------------------------------------------------


def simulate_forest_levels(forest: RootedForest, seed: int | random.Random) -> list[int]:
    """Draw one level vector from the forest-based level process.

    A leaf gets level 1.  An internal vertex whose highest child level
    ``top`` is attained by ``c`` children keeps ``top`` with probability
    ``2**-(c-1)`` and otherwise gets ``top + 1``.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    levels = [0] * len(forest)
    for v in range(len(forest)):
        kids = forest.children[v]
        if not kids:
            levels[v] = 1
            continue
        top = max(levels[c] for c in kids)
        ties = sum(1 for c in kids if levels[c] == top)
        # keep with prob 2^-(ties-1): all ties-1 extra fair coins come up heads
        keep = all(rng.getrandbits(1) for _ in range(ties - 1))
        levels[v] = top if keep else top + 1
    return levels


LevelDist = dict[int, Fraction]


def _combine(child_dists: Sequence[LevelDist]) -> LevelDist:
    """Level distribution of a vertex given independent child level distributions."""
    if not child_dists:
        return {1: Fraction(1)}
    # joint over (top, ties); each child's level is independent
    state: dict[tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
    for dist in child_dists:
        nxt: dict[tuple[int, int], Fraction] = {}
        for (top, ties), p in state.items():
            for lvl, q in dist.items():
                if lvl > top:
                    key = (lvl, 1)
                elif lvl == top:
                    key = (top, ties + 1)
                else:
                    key = (top, ties)
                nxt[key] = nxt.get(key, Fraction(0)) + p * q
        state = nxt
    out: LevelDist = {}
    for (top, ties), p in state.items():
        keep = Fraction(1, 2 ** (ties - 1))
        out[top] = out.get(top, Fraction(0)) + p * keep
        if keep != 1:
            out[top + 1] = out.get(top + 1, Fraction(0)) + p * (1 - keep)
    return {k: v for k, v in out.items() if v}


def exact_level_distribution(forest: RootedForest, cap: int = DEFAULT_FOREST_CAP) -> list[LevelDist]:
    """Exact marginal level distribution of every vertex.

    Children of a vertex are independent (disjoint subtrees), so marginals
    combine bottom-up.  Marginals are exact; the joint law of the whole
    vector is given by :func:`exact_joint_level_distribution`.
    """
    if len(forest) > cap:
        raise ForestTooLarge(f"forest has {len(forest)} vertices, cap is {cap}")
    dists: list[LevelDist] = []
    for v in range(len(forest)):
        dists.append(_combine([dists[c] for c in forest.children[v]]))
    return dists


def exact_joint_level_distribution(forest: RootedForest, cap: int = 16) -> dict[tuple[int, ...], Fraction]:
    """Exact joint law of the full level vector, by sequential expansion."""
    if len(forest) > cap:
        raise ForestTooLarge(f"forest has {len(forest)} vertices, cap is {cap}")
    outcomes: dict[tuple[int, ...], Fraction] = {(): Fraction(1)}
    for v in range(len(forest)):
        kids = forest.children[v]
        nxt: dict[tuple[int, ...], Fraction] = {}
        for prefix, p in outcomes.items():
            if not kids:
                branches = [(1, Fraction(1))]
            else:
                top = max(prefix[c] for c in kids)
                ties = sum(1 for c in kids if prefix[c] == top)
                keep = Fraction(1, 2 ** (ties - 1))
                branches = [(top, keep)] + ([(top + 1, 1 - keep)] if keep != 1 else [])
            for lvl, q in branches:
                key = prefix + (lvl,)
                nxt[key] = nxt.get(key, Fraction(0)) + p * q
        outcomes = nxt
    return outcomes


def prob_at_least(dist: LevelDist, t: int) -> Fraction:
    return sum((p for lvl, p in dist.items() if lvl >= t), Fraction(0))


def expected_terminals(forest: RootedForest, level: int, cap: int = 16) -> Fraction:
    """Exact expected number of level-``level`` terminals in a binary forest.

    A level-1 terminal is a leaf; a level-``i`` terminal has level ``i`` and
    two children of level ``i-1``.  Computed from the joint law, so it is an
    independent check of the closed form below.
    """
    total = Fraction(0)
    for levels, p in exact_joint_level_distribution(forest, cap).items():
        count = 0
        for v in range(len(forest)):
            kids = forest.children[v]
            if not kids:
                count += level == 1
            elif levels[v] == level and all(levels[c] == level - 1 for c in kids):
                count += 1
        total += p * count
    return total


def expected_level2_terminals(forest: RootedForest) -> Fraction:
    """Closed form ``sum_v 2**-(s_v - 1)`` over internal vertices of a binary forest.

    ``s_v`` is the number of leaves under ``v``.  A leaf is never a level-2
    terminal; a single-leaf tree therefore scores 0.
    """
    if not forest.is_binary():
        raise ForestError("closed form needs a binary forest")
    return sum(
        (Fraction(1, 2 ** (forest.leaf_count[v] - 1)) for v in range(len(forest)) if not forest.is_leaf(v)),
        Fraction(0),
    )


def max_level2_terminals(leaves: int) -> Fraction:
    """``a_m``: the largest expected level-2 terminal count over binary trees."""
    return max(expected_level2_terminals(t) for t in binary_trees(leaves))


def gamma1_closed_form(terms: int) -> Fraction:
    """Partial sum ``sum_{i=1..terms} 2**-(2**i - 1 + i)``."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    return sum((Fraction(1, 2 ** (2**i - 1 + i)) for i in range(1, terms + 1)), Fraction(0))


def complete_tree_level2(k: int) -> Fraction:
    """``a`` for the complete binary tree with ``2**k`` leaves, by the closed form."""
    return 2**k * gamma1_closed_form(k) if k >= 1 else Fraction(0)


# --------------------------------------------------------------------------
# fixed-denominator dynamic programs
# --------------------------------------------------------------------------


def _check_denominator(D: int) -> None:
    if D < 2 or D & (D - 1):
        raise ValueError(f"denominator must be a power of two, got {D}")


def _ceil_div(a: np.ndarray, b: int) -> np.ndarray:
    return -((-a) // b)


def dp_p_prime(m_max: int, t_max: int, D: int = 2**DEFAULT_LOG2_DENOMINATOR) -> np.ndarray:
    """Table ``P[t, m]`` of numerators of ``p'_{m,t}`` over ``D``.

    Row 0 and column 0 are unused padding.  Each split value is evaluated
    exactly over the common denominator ``2*D*D`` and rounded up once to the
    grid.  The recurrence is monotone in its inputs, so entries dominate
    the exact values and shrink (weakly) when ``D`` grows.
    """
    _check_denominator(D)
    if D > 2**MAX_LOG2_DENOMINATOR:
        raise ValueError(f"D above 2**{MAX_LOG2_DENOMINATOR} overflows int64 products")
    if m_max < 1 or t_max < 1:
        raise ValueError("m_max and t_max must be >= 1")
    P = np.zeros((t_max + 1, m_max + 1), dtype=np.int64)
    P[1, 1:] = D
    two_d_sq = 2 * D * D
    for t in range(2, t_max + 1):
        cur = P[t]
        prev = P[t - 1]
        for m in range(2, m_max + 1):
            ml = np.arange(1, m // 2 + 1)
            mr = m - ml
            a, b = cur[ml], cur[mr]
            # 2D^2 * [1 - (1-a)(1-b) + (a'-a)(b'-b)/2]
            num = two_d_sq - 2 * (D - a) * (D - b) + (prev[ml] - a) * (prev[mr] - b)
            cur[m] = int(_ceil_div(num, 2 * D).max())
    return P


def dp_b_prime(L: int, m_max: int, D: int = 2**DEFAULT_LOG2_DENOMINATOR, P: np.ndarray | None = None) -> np.ndarray:
    """Numerators of ``b'^{(L)}_m`` over ``D`` for ``m = 0..m_max`` (index 0 unused)."""
    _check_denominator(D)
    if P is None or P.shape[0] < L + 2 or P.shape[1] < m_max + 1:
        P = dp_p_prime(m_max, L + 1, D)
    q = P[L + 1]
    Bt = np.zeros(m_max + 1, dtype=np.int64)
    Bt[1] = D
    for m in range(2, m_max + 1):
        ml = np.arange(1, m // 2 + 1)
        mr = m - ml
        cross = _ceil_div(q[ml] * q[mr], D)
        Bt[m] = D + int((Bt[ml] - D + Bt[mr] - D + cross).max())
    return Bt


def round_up_decimal(x: Fraction, places: int) -> Decimal:
    """``x`` rounded toward +inf at ``places`` digits after the decimal point."""
    with localcontext() as ctx:
        ctx.prec = 60
        q = Decimal(x.numerator) / Decimal(x.denominator)
        return q.quantize(Decimal(1).scaleb(-places), rounding=ROUND_CEILING)


def format_sci_up(x: Fraction, digits: int = 6) -> str:
    """Scientific notation with the mantissa rounded up, e.g. ``2.822285e-1``."""
    if x <= 0:
        raise ValueError("positive values only")
    exp = math.floor(math.log10(x.numerator) - math.log10(x.denominator))
    # correct for float error in the exponent guess
    while x >= Fraction(10) ** (exp + 1):
        exp += 1
    while x < Fraction(10) ** exp:
        exp -= 1
    mant = round_up_decimal(x / Fraction(10) ** exp, digits)
    if mant >= 10:
        mant, exp = round_up_decimal(Fraction(mant) / 10, digits), exp + 1
    return f"{mant}e{exp}"


def color_coefficient(L: int, gamma: Fraction) -> Decimal:
    """Colours per ``log2 n``: ``2L / log2(1/gamma)`` rounded up to 6 decimals.

    Levels are counted by ``L / log2(1/gamma)`` per ``log2 n`` and every
    level owns two colours.
    """
    with localcontext() as ctx:
        ctx.prec = 60
        g = Decimal(gamma.numerator) / Decimal(gamma.denominator)
        coef = Decimal(2 * L) * Decimal(2).ln() / (1 / g).ln()
        return coef.quantize(Decimal("0.000001"), rounding=ROUND_CEILING)


@dataclass
class UpperBoundResult:
    L: int
    B: int
    D: int
    gamma: Fraction
    argmax_m: int
    coefficient: Decimal

    @property
    def gamma_str(self) -> str:
        return format_sci_up(self.gamma)

    def row(self) -> dict:
        return {
            "L": self.L,
            "B": self.B,
            "gamma_prime": self.gamma_str,
            "coefficient": str(self.coefficient),
        }


def gamma_upper_bound(L: int, B: int, D: int = 2**DEFAULT_LOG2_DENOMINATOR, b_table: np.ndarray | None = None) -> UpperBoundResult:
    """Largest ``b'_m / m`` over the window ``B <= m <= 2B-1``, and its colour coefficient."""
    if L < 1 or B < 1:
        raise ValueError("L and B must be >= 1")
    m_max = 2 * B - 1
    if b_table is None:
        b_table = dp_b_prime(L, m_max, D)
    best, arg = Fraction(-1), B
    for m in range(B, m_max + 1):
        val = Fraction(int(b_table[m]), m * D)
        if val > best:
            best, arg = val, m
    return UpperBoundResult(L, B, D, best, arg, color_coefficient(L, best))


def table3_schedule(L: int) -> int:
    """Window start used for the reported table rows: ``2**(2L+2) + 1``."""
    return 2 ** (2 * L + 2) + 1


@lru_cache(maxsize=None)
def _table3_reference() -> dict[int, tuple[str, str]]:
    return {
        1: ("2.822285e-1", "1.095852"),
        2: ("7.373281e-2", "1.063392"),
        3: ("1.912694e-2", "1.051111"),
        4: ("4.957865e-3", "1.044924"),
        5: ("1.284998e-3", "1.041231"),
        6: ("3.330478e-4", "1.038783"),
        7: ("8.632023e-5", "1.037042"),
        8: ("2.237284e-5", "1.035741"),
        9: ("5.798723e-6", "1.034731"),
        10: ("1.502954e-6", "1.033925"),
    }


def published_row(L: int) -> tuple[str, str]:
    """Published ``(gamma', coefficient)`` strings for the row ``L``."""
    return _table3_reference()[L]
