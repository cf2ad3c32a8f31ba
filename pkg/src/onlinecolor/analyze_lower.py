"""Potential-based lower bound for randomized online bipartite colouring.

A component of the adversarial instance is summarised by its state
``(X, Y)``: the colour sets used on the two sides of its bipartition.
Here colour sets are Python ``int`` bitmasks.  Merging two components
unions the sides in one of two ways, and the algorithm then colours two
new adjacent vertices ``a`` (joined to the ``Y`` side) and ``b`` (joined
to the ``X`` side).

The module provides

* potentials (linear ones, plus the piecewise ``phi_A``);
* the single-merge quantities ``delta0`` and ``f`` and the extension
  minimum ``g`` (branch and bound over added colours);
* ``potential_increase``: the two-phase expectimax over four components;
* state matrices, their standard form, and the pruned depth-first search
  enumerating every matrix that could still violate the target bound.

All arithmetic is exact (``fractions.Fraction``); the search hot loop
works on integers scaled by a common denominator.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

State = tuple[int, int]  # (X, Y) colour bitmasks

EMPTY: State = (0, 0)


def state_from_sets(X: Iterable[int], Y: Iterable[int]) -> State:
    """Bitmask state from explicit colour ids (colour ``k`` is bit ``k``)."""
    xm = 0
    for c in X:
        xm |= 1 << c
    ym = 0
    for c in Y:
        ym |= 1 << c
    return xm, ym


def state_sizes(s: State) -> tuple[int, int, int]:
    """``(|X & Y|, |X \\ Y|, |Y \\ X|)``."""
    X, Y = s
    return (X & Y).bit_count(), (X & ~Y).bit_count(), (Y & ~X).bit_count()


def is_non_inclusive(s: State) -> bool:
    """Neither side contains the other."""
    X, Y = s
    return bool(X & ~Y) and bool(Y & ~X)


def canonical_state(s: State) -> State:
    """Representative of ``{(X, Y), (Y, X)}``."""
    return s if s[0] <= s[1] else (s[1], s[0])


# --------------------------------------------------------------------------
# potentials
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Potential:
    """``a*|X & Y| + b*|X ^ Y|`` with optional overrides keyed on ``(|X\\Y|, |Y\\X|)``.

    An override replaces the ``b*|X ^ Y|`` part for the listed size pairs.
    """

    name: str
    a: Fraction
    b: Fraction
    overrides: tuple[tuple[tuple[int, int], Fraction], ...] = ()

    @property
    def is_linear(self) -> bool:
        return not self.overrides

    def from_sizes(self, inter: int, xo: int, yo: int) -> Fraction:
        for key, val in self.overrides:
            if key == (xo, yo):
                return self.a * inter + val
        return self.a * inter + self.b * (xo + yo)

    def __call__(self, s: State) -> Fraction:
        return self.from_sizes(*state_sizes(s))


PHI1 = Potential("phi1", Fraction(1), Fraction(1, 2))
PHI2 = Potential("phi2", Fraction(1), Fraction(11, 21))
PHI_B = Potential("phiB", Fraction(1, 2), Fraction(1, 3))
PHI_A_SURROGATE = Potential("phiA'", Fraction(1, 2), Fraction(1, 4))
PHI_A = Potential(
    "phiA",
    Fraction(1, 2),
    Fraction(1, 4),
    (
        ((2, 1), Fraction(17, 24)),
        ((1, 2), Fraction(17, 24)),
        ((3, 1), Fraction(5, 6)),
        ((1, 3), Fraction(5, 6)),
    ),
)

POTENTIALS = {p.name: p for p in (PHI1, PHI2, PHI_B, PHI_A_SURROGATE, PHI_A)}
# the largest amount by which phi_A undercuts its linear surrogate
PHI_A_SLACK = Fraction(1, 6)


def potential(which: Potential | str, s: State) -> Fraction:
    if isinstance(which, str):
        which = POTENTIALS[which]
    return which(s)


# --------------------------------------------------------------------------
# merging and colouring the two new vertices
# --------------------------------------------------------------------------


def merge_states(s1: State, s2: State, wiring: int) -> State:
    """Pre-colour state after merging: wiring 0 joins like sides, wiring 1 crosses."""
    if wiring == 0:
        return s1[0] | s2[0], s1[1] | s2[1]
    if wiring == 1:
        return s1[0] | s2[1], s1[1] | s2[0]
    raise ValueError("wiring must be 0 or 1")


def complete_sizes(inter: int, xo: int, yo: int) -> tuple[int, int, int]:
    """Sizes after colouring the new pair with the forced-choice rule.

    ``a`` reuses a colour of ``X \\ Y`` when one exists, otherwise takes a
    colour absent from the component; same for ``b`` on the other side.
    """
    return inter, max(xo, 1), max(yo, 1)


def complete_state(s: State, palette: int) -> tuple[State, int]:
    """Forced-choice completion using the lowest fresh colours; returns the new palette size."""
    X, Y = s
    if not X & ~Y:
        X |= 1 << palette
        palette += 1
    if not Y & ~X:
        Y |= 1 << palette
        palette += 1
    return (X, Y), palette


def single_merge_increase(s1: State, s2: State, phi: Potential) -> Fraction:
    """``f``: expected potential of the merged, coloured component minus the input average."""
    total = Fraction(0)
    for w in (0, 1):
        total += phi.from_sizes(*complete_sizes(*state_sizes(merge_states(s1, s2, w))))
    return total / 2 - (phi(s1) + phi(s2)) / 2


def delta0(s1: State, s2: State, phi: Potential) -> Fraction:
    """Expected pre-colour potential minus the input average (linear potentials only)."""
    if not phi.is_linear:
        raise ValueError(f"{phi.name} is not linear; use its linear surrogate")
    total = Fraction(0)
    for w in (0, 1):
        total += phi(merge_states(s1, s2, w))
    return total / 2 - (phi(s1) + phi(s2)) / 2


def phi1_merge_bound(colors: int = 3) -> tuple[Fraction, set[Fraction]]:
    """Exhaustive single-merge check for ``phi1`` over non-inclusive states on ``colors`` colours.

    Returns the minimum of ``f`` and the set of ``f`` values on pairs whose
    pre-colour increase ``delta0`` is below ``3/4`` (the exceptional pairs).
    """
    states = [(x, y) for x in range(1 << colors) for y in range(1 << colors) if is_non_inclusive((x, y))]
    lowest: Fraction | None = None
    exceptional: set[Fraction] = set()
    for s1 in states:
        for s2 in states:
            f = single_merge_increase(s1, s2, PHI1)
            lowest = f if lowest is None else min(lowest, f)
            if delta0(s1, s2, PHI1) < Fraction(3, 4):
                exceptional.add(f)
    return lowest, exceptional


# --------------------------------------------------------------------------
# pair patterns: a colour's membership in two components
# --------------------------------------------------------------------------
#
# A colour's membership in one component is a digit 0..3 (bit 0: in X,
# bit 1: in Y).  For a pair of components a colour has pattern
# p = 4*d1 + d2.  Patterns 0 (absent from both) and 15 (everywhere) never
# change f, so a pair of states is summarised by counts of the other 14.

ACTIVE_PATTERNS = tuple(p for p in range(16) if p not in (0, 15))
_FLIP_DIGIT = (0, 2, 1, 3)


def _pattern_perm(flip1: bool, flip2: bool, swap: bool) -> tuple[int, ...]:
    out = []
    for p in range(16):
        d1, d2 = divmod(p, 4)
        if flip1:
            d1 = _FLIP_DIGIT[d1]
        if flip2:
            d2 = _FLIP_DIGIT[d2]
        if swap:
            d1, d2 = d2, d1
        out.append(4 * d1 + d2)
    return tuple(out)


PAIR_SYMMETRIES = tuple(_pattern_perm(*bits) for bits in itertools.product((False, True), repeat=3))

Counts = tuple[int, ...]  # length 16, indexed by pattern


def pair_counts(s1: State, s2: State) -> Counts:
    counts = [0] * 16
    top = max(s1[0] | s1[1] | s2[0] | s2[1], 0).bit_length()
    for k in range(top):
        d1 = (s1[0] >> k & 1) | (s1[1] >> k & 1) << 1
        d2 = (s2[0] >> k & 1) | (s2[1] >> k & 1) << 1
        counts[4 * d1 + d2] += 1
    counts[0] = counts[15] = 0
    return tuple(counts)


def states_from_counts(counts: Counts) -> tuple[State, State]:
    X1 = Y1 = X2 = Y2 = 0
    k = 0
    for p in ACTIVE_PATTERNS:
        d1, d2 = divmod(p, 4)
        for _ in range(counts[p]):
            bit = 1 << k
            if d1 & 1:
                X1 |= bit
            if d1 & 2:
                Y1 |= bit
            if d2 & 1:
                X2 |= bit
            if d2 & 2:
                Y2 |= bit
            k += 1
    return (X1, Y1), (X2, Y2)


def canonical_counts(counts: Counts) -> Counts:
    return min(tuple(counts[perm.index(p)] for p in range(16)) for perm in PAIR_SYMMETRIES)


def _sizes_from_counts(counts: Counts) -> tuple[tuple[int, int, int], tuple[int, int, int], list[tuple[int, int, int]]]:
    """Sizes of both inputs and of the two merged pre-colour states."""
    s1 = [0, 0, 0]
    s2 = [0, 0, 0]
    merged = [[0, 0, 0], [0, 0, 0]]
    slot = {1: 1, 2: 2, 3: 0}
    for p in ACTIVE_PATTERNS:
        n = counts[p]
        if not n:
            continue
        d1, d2 = divmod(p, 4)
        if d1:
            s1[slot[d1]] += n
        if d2:
            s2[slot[d2]] += n
        for w in (0, 1):
            e2 = _FLIP_DIGIT[d2] if w else d2
            d = d1 | e2
            if d:
                merged[w][slot[d]] += n
    return tuple(s1), tuple(s2), [tuple(m) for m in merged]


class PairEvaluator:
    """``f``, the ``delta0`` lower bound and the extension minimum ``g`` on pattern counts.

    ``phi`` is the potential whose increase is measured; ``bound_phi`` is a
    linear potential with ``phi >= bound_phi - slack`` and ``phi <= bound_phi``
    used for pruning (``bound_phi = phi`` and ``slack = 0`` when ``phi`` is
    linear).
    """

    def __init__(self, phi: Potential, bound_phi: Potential | None = None, slack: Fraction = Fraction(0)):
        if bound_phi is None:
            if not phi.is_linear:
                raise ValueError("non-linear potential needs a linear surrogate")
            bound_phi = phi
        if not bound_phi.is_linear:
            raise ValueError("surrogate must be linear")
        self.phi = phi
        self.bound_phi = bound_phi
        self.slack = slack
        self._g_cache: dict[Counts, Fraction] = {}
        self._f_cache: dict[Counts, Fraction] = {}
        # per-pattern contribution to delta0 of the surrogate
        self.d0_table = [Fraction(0)] * 16
        for p in ACTIVE_PATTERNS:
            unit = [0] * 16
            unit[p] = 1
            self.d0_table[p] = self._delta0_direct(tuple(unit))

    def _delta0_direct(self, counts: Counts) -> Fraction:
        s1, s2, merged = _sizes_from_counts(counts)
        phi = self.bound_phi
        return (phi.from_sizes(*merged[0]) + phi.from_sizes(*merged[1])) / 2 - (
            phi.from_sizes(*s1) + phi.from_sizes(*s2)
        ) / 2

    def delta0(self, counts: Counts) -> Fraction:
        """Lower bound on ``f`` over every extension of ``counts``."""
        return sum((self.d0_table[p] * counts[p] for p in ACTIVE_PATTERNS), Fraction(0)) - self.slack

    def f(self, counts: Counts) -> Fraction:
        hit = self._f_cache.get(counts)
        if hit is not None:
            return hit
        s1, s2, merged = _sizes_from_counts(counts)
        phi = self.phi
        val = (phi.from_sizes(*complete_sizes(*merged[0])) + phi.from_sizes(*complete_sizes(*merged[1]))) / 2 - (
            phi.from_sizes(*s1) + phi.from_sizes(*s2)
        ) / 2
        self._f_cache[counts] = val
        return val

    @staticmethod
    def valid(counts: Counts) -> bool:
        """Both components satisfy non-inclusion."""
        x1 = sum(counts[p] for p in ACTIVE_PATTERNS if p // 4 == 1)
        y1 = sum(counts[p] for p in ACTIVE_PATTERNS if p // 4 == 2)
        x2 = sum(counts[p] for p in ACTIVE_PATTERNS if p % 4 == 1)
        y2 = sum(counts[p] for p in ACTIVE_PATTERNS if p % 4 == 2)
        return bool(x1 and y1 and x2 and y2)

    def _minimal_completion_value(self, counts: Counts) -> Fraction | None:
        """Smallest ``f`` among valid states reached by adding at most two colours."""
        best = None
        base = list(counts)
        for k in (1, 2):
            for combo in itertools.combinations_with_replacement(ACTIVE_PATTERNS, k):
                c = base[:]
                for p in combo:
                    c[p] += 1
                t = tuple(c)
                if self.valid(t):
                    v = self.f(t)
                    if best is None or v < best:
                        best = v
            if best is not None:
                return best
        return best

    def lower_bound(self, counts: Counts, beta: Fraction | None = None) -> Fraction:
        """Minimum of ``f`` over valid extensions of ``counts``, or ``beta`` if it is at least ``beta``.

        Branch and bound: a node is cut once its ``delta0`` bound reaches the
        best value so far.  Added colours are enumerated as multisets of
        patterns, since the order in which colours are added is irrelevant.
        """
        best = [beta]

        def visit(c: list[int], start: int) -> None:
            t = tuple(c)
            if best[0] is not None and self.delta0(t) >= best[0]:
                return
            if self.valid(t):
                v = self.f(t)
            else:
                v = self._minimal_completion_value(t)
            if v is not None and (best[0] is None or v < best[0]):
                best[0] = v
            for i in range(start, len(ACTIVE_PATTERNS)):
                p = ACTIVE_PATTERNS[i]
                c[p] += 1
                visit(c, i)
                c[p] -= 1

        visit(list(counts), 0)
        assert best[0] is not None
        return best[0]

    def g(self, counts: Counts) -> Fraction:
        """Exact extension minimum, memoised on the symmetry class of ``counts``."""
        key = canonical_counts(counts)
        hit = self._g_cache.get(key)
        if hit is None:
            hit = self.lower_bound(key)
            self._g_cache[key] = hit
        return hit

    def g_states(self, s1: State, s2: State) -> Fraction:
        return self.g(pair_counts(s1, s2))


def lower_bound_pair(s1: State, s2: State, beta: Fraction | None, evaluator: PairEvaluator) -> Fraction:
    return evaluator.lower_bound(pair_counts(s1, s2), beta)


def phi2_evaluator() -> PairEvaluator:
    return PairEvaluator(PHI2)


def phiA_evaluator() -> PairEvaluator:
    return PairEvaluator(PHI_A, PHI_A_SURROGATE, PHI_A_SLACK)


# --------------------------------------------------------------------------
# two-phase expectimax
# --------------------------------------------------------------------------

PAIRINGS = (
    ((0, 1), (2, 3)),
    ((2, 3), (0, 1)),
    ((0, 2), (1, 3)),
    ((1, 3), (0, 2)),
    ((0, 3), (1, 2)),
    ((1, 2), (0, 3)),
)


def _membership_key(k: int, context: Sequence[State]) -> tuple[int, ...]:
    return tuple((s[0] >> k & 1) | (s[1] >> k & 1) << 1 for s in context)


def coloring_choices(s: State, palette: int, context: Sequence[State]) -> list[tuple[State, int]]:
    """Distinct outcomes of colouring the new pair of a merged component.

    The ``a`` vertex must avoid ``Y`` and the ``b`` vertex must avoid ``X``;
    they differ.  When ``X \\ Y`` is non-empty ``a`` reuses one of those
    colours (the state does not change), likewise for ``b``.  Otherwise any
    colour in ``0..palette`` not already on the component may be used, with
    ``palette`` itself meaning a new colour.  Colours that agree on their
    membership in every ``context`` state give relabelled copies of the same
    future, so only one representative per class is returned.
    """
    X, Y = s
    used = X | Y
    a_opts: list[int | None] = [None] if X & ~Y else [k for k in range(palette + 1) if not used >> k & 1]
    out: list[tuple[State, int]] = []
    seen: set = set()
    for a in a_opts:
        pal_a = palette + 1 if a == palette else palette
        if Y & ~X:
            b_opts: list[int | None] = [None]
        else:
            b_opts = [k for k in range(pal_a + 1) if not used >> k & 1 and k != a]
        for b in b_opts:
            pal = pal_a + 1 if b == pal_a else pal_a
            key = (
                None if a is None else _membership_key(a, context),
                None if b is None else _membership_key(b, context),
            )
            if key in seen:
                continue
            seen.add(key)
            nX = X if a is None else X | 1 << a
            nY = Y if b is None else Y | 1 << b
            out.append(((nX, nY), pal))
    return out


def potential_increase(
    states: Sequence[State],
    phi_a: Potential,
    phi_b: Potential | None = None,
    palette: int | None = None,
) -> Fraction:
    """Expected two-phase potential increase when the colouring player plays optimally.

    With ``phi_b`` omitted this measures ``phi_a`` over both phases.  With
    both given, the first phase is measured in ``phi_a`` and the second in
    ``phi_b``.  Pairings and their order are uniform over the six choices,
    each merge takes one of its two wirings with probability ½, and the
    player minimises after each merge.
    """
    if len(states) != 4:
        raise ValueError("need exactly four component states")
    if phi_b is None:
        phi_b = phi_a
    if palette is None:
        palette = max(s[0] | s[1] for s in states).bit_length()
    base = sum((phi_a(s) for s in states), Fraction(0)) / 4
    total = Fraction(0)
    cache: dict = {}

    def final_value(s5: State, s6: State) -> Fraction:
        key = (s5, s6)
        hit = cache.get(key)
        if hit is not None:
            return hit
        # phase-two increase in phi_b plus phase-one increase in phi_a
        mid = (phi_a(s5) + phi_a(s6)) / 2 - base - (phi_b(s5) + phi_b(s6)) / 2
        acc = Fraction(0)
        for w in (0, 1):
            acc += phi_b.from_sizes(*complete_sizes(*state_sizes(merge_states(s5, s6, w))))
        val = acc / 2 + mid
        cache[key] = val
        return val

    for (i, j), (k, l) in PAIRINGS:
        c1, c2, c3, c4 = states[i], states[j], states[k], states[l]
        a0 = Fraction(0)
        for w1 in (0, 1):
            b0 = None
            for s5, pal5 in coloring_choices(merge_states(c1, c2, w1), palette, (c3, c4)):
                assert is_non_inclusive(s5)
                a1 = Fraction(0)
                for w2 in (0, 1):
                    b1 = None
                    for s6, _ in coloring_choices(merge_states(c3, c4, w2), pal5, (s5,)):
                        assert is_non_inclusive(s6)
                        v = final_value(s5, s6)
                        if b1 is None or v < b1:
                            b1 = v
                    a1 += b1 / 2
                if b0 is None or a1 < b0:
                    b0 = a1
            a0 += b0 / 2
        total += a0 / 6
    return total


def potential_increase_bruteforce(states: Sequence[State], phi_a: Potential, phi_b: Potential | None = None) -> Fraction:
    """Unreduced expectimax: every colour pair in the no-jump palette, every final colouring.

    Used as an oracle for :func:`potential_increase`; exponential, small inputs only.
    """
    if phi_b is None:
        phi_b = phi_a
    palette = max(s[0] | s[1] for s in states).bit_length()
    base = sum((phi_a(s) for s in states), Fraction(0)) / 4

    def colourings(s: State, pal: int, forced: bool):
        X, Y = s
        if forced and X & ~Y:
            a_opts = [None]
        else:
            a_opts = [k for k in range(pal + 1) if not Y >> k & 1]
        for a in a_opts:
            pal_a = pal + 1 if a == pal else pal
            if forced and Y & ~X:
                b_opts = [None]
            else:
                b_opts = [k for k in range(pal_a + 1) if not X >> k & 1 and k != a]
            for b in b_opts:
                npal = pal_a + 1 if b == pal_a else pal_a
                yield (X if a is None else X | 1 << a, Y if b is None else Y | 1 << b), npal

    total = Fraction(0)
    for (i, j), (k, l) in PAIRINGS:
        c1, c2, c3, c4 = states[i], states[j], states[k], states[l]
        a0 = Fraction(0)
        for w1 in (0, 1):
            b0 = None
            for s5, pal5 in colourings(merge_states(c1, c2, w1), palette, True):
                a1 = Fraction(0)
                for w2 in (0, 1):
                    b1 = None
                    for s6, pal6 in colourings(merge_states(c3, c4, w2), pal5, True):
                        a2 = Fraction(0)
                        for w3 in (0, 1):
                            b2 = None
                            for s7, _ in colourings(merge_states(s5, s6, w3), pal6, False):
                                v = phi_b(s7) - (phi_b(s5) + phi_b(s6)) / 2 + (phi_a(s5) + phi_a(s6)) / 2 - base
                                if b2 is None or v < b2:
                                    b2 = v
                            a2 += b2 / 2
                        if b1 is None or a2 < b1:
                            b1 = a2
                    a1 += b1 / 2
                if b0 is None or a1 < b0:
                    b0 = a1
            a0 += b0 / 2
        total += a0 / 6
    return total


# --------------------------------------------------------------------------
# state matrices and standard form
# --------------------------------------------------------------------------
#
# A column is encoded as a base-4 number with row 1 as the most significant
# digit, so comparing codes compares columns lexicographically.

NUM_CODES = 256
FORBIDDEN_CODES = (0, 255)
VALID_CODES = tuple(c for c in range(NUM_CODES) if c not in FORBIDDEN_CODES)


def column_digits(code: int) -> tuple[int, int, int, int]:
    return (code >> 6 & 3, code >> 4 & 3, code >> 2 & 3, code & 3)


def column_code(digits: Sequence[int]) -> int:
    d1, d2, d3, d4 = digits
    return d1 << 6 | d2 << 4 | d3 << 2 | d4


def _symmetry_table() -> np.ndarray:
    rows = []
    for perm in itertools.permutations(range(4)):
        for flips in itertools.product((False, True), repeat=4):
            table = np.empty(NUM_CODES, dtype=np.int16)
            for code in range(NUM_CODES):
                d = column_digits(code)
                # new row r takes old row perm[r], optionally with 1 and 2 swapped
                nd = [_FLIP_DIGIT[d[perm[r]]] if flips[r] else d[perm[r]] for r in range(4)]
                table[code] = column_code(nd)
            rows.append(table)
    return np.stack(rows)


SYMMETRY_TABLE = _symmetry_table()  # shape (384, 256)


def canonical_matrix(codes: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically smallest column-sorted image under the 384 row symmetries."""
    if not codes:
        return ()
    images = np.sort(SYMMETRY_TABLE[:, np.asarray(codes, dtype=np.int64)], axis=1)
    best = min(map(tuple, images.tolist()))
    return best


def is_standard_form(codes: Sequence[int]) -> bool:
    """True when the matrix (as a list of column codes) equals its canonical form."""
    codes = tuple(codes)
    if not codes:
        return True
    if any(codes[i] > codes[i + 1] for i in range(len(codes) - 1)):
        return False
    images = np.sort(SYMMETRY_TABLE[:, np.asarray(codes, dtype=np.int64)], axis=1)
    diff = images != np.asarray(codes)
    has_diff = diff.any(axis=1)
    first = diff.argmax(axis=1)
    smaller = images[np.arange(len(images)), first] < np.asarray(codes)[first]
    return not bool((has_diff & smaller).any())


def matrix_to_states(codes: Sequence[int]) -> list[State]:
    states = [[0, 0] for _ in range(4)]
    for k, code in enumerate(codes):
        for r, d in enumerate(column_digits(code)):
            if d & 1:
                states[r][0] |= 1 << k
            if d & 2:
                states[r][1] |= 1 << k
    return [tuple(s) for s in states]


def states_to_matrix(states: Sequence[State]) -> list[int]:
    """Column codes of four states, dropping all-0 and all-3 colours (unsorted)."""
    top = max(s[0] | s[1] for s in states).bit_length()
    codes = []
    for k in range(top):
        d = [(s[0] >> k & 1) | (s[1] >> k & 1) << 1 for s in states]
        code = column_code(d)
        if code not in FORBIDDEN_CODES:
            codes.append(code)
    return codes


def every_row_has_one_and_two(codes: Sequence[int]) -> bool:
    seen = [0, 0, 0, 0]
    for code in codes:
        for r, d in enumerate(column_digits(code)):
            seen[r] |= 1 << d
    return all(s & 0b110 == 0b110 for s in seen)


# --------------------------------------------------------------------------
# the search
# --------------------------------------------------------------------------

ROW_PAIRS = tuple(itertools.combinations(range(4), 2))
ROOT_SHARD = -1
_PATTERN_BITS = 8  # counts are packed 8 bits per pattern into one int key


def _code_pair_patterns(code: int) -> tuple[int, ...]:
    d = column_digits(code)
    return tuple(4 * d[i] + d[j] for i, j in ROW_PAIRS)


def _unpack(key: int) -> Counts:
    mask = (1 << _PATTERN_BITS) - 1
    return tuple((key >> (_PATTERN_BITS * p)) & mask for p in range(16))


@dataclass
class SearchConfig:
    name: str
    evaluator_factory: Callable[[], PairEvaluator]
    threshold: Fraction
    phi_a: Potential
    phi_b: Potential
    target: Fraction


def phi2_config() -> SearchConfig:
    return SearchConfig("phi2", phi2_evaluator, Fraction(125, 112), PHI2, PHI2, Fraction(89, 48))


def phiAB_config() -> SearchConfig:
    return SearchConfig("phiAB", phiA_evaluator, Fraction(59, 96), PHI_A, PHI_B, Fraction(91, 96))


CONFIGS = {"phi2": phi2_config, "phiAB": phiAB_config}


@dataclass
class SearchResult:
    mode: str
    count_pruned_pass: int = 0
    count_rows_with_1_and_2: int = 0
    count_threshold_pass: int = 0
    min_potential_increase: Fraction | None = None
    argmin: tuple[int, ...] | None = None
    completed_shards: list[int] = field(default_factory=list)
    wall_time: float = 0.0

    def merge(self, other: "SearchResult") -> None:
        self.count_pruned_pass += other.count_pruned_pass
        self.count_rows_with_1_and_2 += other.count_rows_with_1_and_2
        self.count_threshold_pass += other.count_threshold_pass
        if other.min_potential_increase is not None and (
            self.min_potential_increase is None or other.min_potential_increase < self.min_potential_increase
        ):
            self.min_potential_increase = other.min_potential_increase
            self.argmin = other.argmin
        self.completed_shards = sorted(set(self.completed_shards) | set(other.completed_shards))

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "counts": {
                "lb_below_threshold_standard": self.count_pruned_pass,
                "rows_with_1_and_2": self.count_rows_with_1_and_2,
                "delta1_below_threshold": self.count_threshold_pass,
            },
            "min_value": None if self.min_potential_increase is None else str(self.min_potential_increase),
            "argmin": None if self.argmin is None else list(self.argmin),
            "completed_shards": self.completed_shards,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SearchResult":
        c = data["counts"]
        mv = data.get("min_value")
        return cls(
            mode=data["mode"],
            count_pruned_pass=c["lb_below_threshold_standard"],
            count_rows_with_1_and_2=c["rows_with_1_and_2"],
            count_threshold_pass=c["delta1_below_threshold"],
            min_potential_increase=None if mv is None else Fraction(mv),
            argmin=None if data.get("argmin") is None else tuple(data["argmin"]),
            completed_shards=list(data.get("completed_shards", [])),
            wall_time=data.get("wall_time", 0.0),
        )


class MatrixSearch:
    """Depth-first enumeration of standard-form state matrices with ``LB < threshold``.

    Columns are appended in non-decreasing code order (a standard-form
    matrix has sorted columns).  A child is discarded when its ``LB``
    (mean of the six pairwise extension minima ``g``) reaches the
    threshold, or when it is not in standard form; neither condition can
    be undone by appending more columns.  The empty matrix is the root; it
    is counted like any other node (shard ``ROOT_SHARD``).
    """

    def __init__(self, config: SearchConfig, evaluate_potential: bool = True):
        self.config = config
        self.evaluator = config.evaluator_factory()
        self.evaluate_potential = evaluate_potential
        # g values are f values, whose denominators divide twice the lcm of
        # the potential's denominators; sums are compared as scaled integers
        self._scale = 2 * _potential_denominator(self.evaluator.phi)
        # LB < thr  <=>  sum(g) < 6*thr  <=>  scaled sum < ceil(6*thr*scale)
        self._limit = math.ceil(6 * config.threshold * self._scale)
        self._g_int: dict[int, int] = {}
        self._children = [
            [(nxt, self._shift_tuple(nxt)) for nxt in range(code, NUM_CODES) if nxt not in FORBIDDEN_CODES]
            for code in range(NUM_CODES)
        ]

    @staticmethod
    def _shift_tuple(code: int) -> tuple[int, ...]:
        return tuple(1 << (_PATTERN_BITS * p) if p not in (0, 15) else 0 for p in _code_pair_patterns(code))

    def _g(self, key: int) -> int:
        hit = self._g_int.get(key)
        if hit is None:
            val = self.evaluator.g(_unpack(key)) * self._scale
            if val.denominator != 1:
                raise AssertionError(f"g value {val} not on the scaled grid")
            hit = int(val)
            # the early exit in _expand relies on g >= 0
            if hit < 0:
                raise AssertionError("negative extension minimum")
            self._g_int[key] = hit
        return hit

    def run(self, shards: Iterable[int] | None = None, result: SearchResult | None = None, on_shard=None) -> SearchResult:
        """Search the subtrees whose first column is in ``shards`` (default: root plus all)."""
        start = time.perf_counter()
        res = result if result is not None else SearchResult(self.config.name)
        shard_list = [ROOT_SHARD, *VALID_CODES] if shards is None else list(shards)
        root_keys = (0,) * 6
        for first in shard_list:
            if first in res.completed_shards:
                continue
            part = SearchResult(self.config.name)
            if first == ROOT_SHARD:
                if sum(self._g(k) for k in root_keys) < self._limit:
                    self._record([], root_keys, part)
            else:
                keys = tuple(k + s for k, s in zip(root_keys, self._shift_tuple(first)))
                if sum(self._g(k) for k in keys) < self._limit:
                    self._expand([first], keys, part)
            part.completed_shards = [first]
            res.merge(part)
            if on_shard is not None:
                on_shard(res)
        res.wall_time += time.perf_counter() - start
        return res

    def _expand(self, codes: list[int], keys: tuple[int, ...], res: SearchResult) -> None:
        """Handle a node whose LB already passed: standard-form check, record, recurse."""
        if not is_standard_form(codes):
            return
        self._record(codes, keys, res)
        g_int = self._g_int
        g = self._g
        limit = self._limit
        k0, k1, k2, k3, k4, k5 = keys
        for nxt, (s0, s1, s2, s3, s4, s5) in self._children[codes[-1]]:
            c0, c1, c2, c3, c4, c5 = k0 + s0, k1 + s1, k2 + s2, k3 + s3, k4 + s4, k5 + s5
            total = 0
            for k in (c0, c1, c2, c3, c4, c5):
                v = g_int.get(k)
                total += g(k) if v is None else v
                if total >= limit:
                    break
            else:
                codes.append(nxt)
                self._expand(codes, (c0, c1, c2, c3, c4, c5), res)
                codes.pop()

    def _record(self, codes: list[int], keys: tuple[int, ...], res: SearchResult) -> None:
        res.count_pruned_pass += 1
        if not every_row_has_one_and_two(codes):
            return
        res.count_rows_with_1_and_2 += 1
        delta1 = sum((self.evaluator.f(_unpack(k)) for k in keys), Fraction(0)) / 6
        if delta1 >= self.config.threshold:
            return
        res.count_threshold_pass += 1
        if not self.evaluate_potential:
            return
        value = potential_increase(matrix_to_states(codes), self.config.phi_a, self.config.phi_b)
        if res.min_potential_increase is None or value < res.min_potential_increase:
            res.min_potential_increase = value
            res.argmin = tuple(codes)


def _potential_denominator(phi: Potential) -> int:
    dens = [phi.a.denominator, phi.b.denominator] + [v.denominator for _, v in phi.overrides]
    return math.lcm(*dens)


def search_bad_matrices(mode: str = "phi2", evaluate_potential: bool = True, threshold: Fraction | None = None) -> SearchResult:
    config = CONFIGS[mode]()
    if threshold is not None:
        config.threshold = threshold
    return MatrixSearch(config, evaluate_potential).run()


def load_checkpoint(path: str | Path) -> SearchResult | None:
    p = Path(path)
    if not p.exists():
        return None
    return SearchResult.from_json(json.loads(p.read_text()))


def save_checkpoint(path: str | Path, result: SearchResult) -> None:
    p = Path(path)
    tmp = p.with_suffix(p.suffix + ".tmp")
    tmp.write_text(json.dumps(result.to_json(), indent=1))
    tmp.replace(p)
