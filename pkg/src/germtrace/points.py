"""Eventually periodic boundary points of the rooted tree.

A point is an infinite word over the alphabet, stored as a preperiod and
a repeating cycle.  The constructor normalises to the unique shortest
form: the cycle is primitive and the preperiod cannot be shortened by
rotating its last letter into the cycle, so equal points compare equal
componentwise.
"""

from __future__ import annotations

import re

from .errors import PointParseError
from .mealy import Aut, Word, as_word, check_word, word_text

# outcomes of walking a state along a point while it keeps fixing letters
MOVED = "moved"        # some prefix is moved: the point is not fixed
INTERIOR = "interior"  # a whole cylinder around the point is fixed
BOUNDARY = "boundary"  # fixed, but no neighbourhood is


class Point:
    """An eventually periodic infinite word u v v v ..."""

    __slots__ = ("preperiod", "period")

    def __init__(self, preperiod, period):
        pre = as_word(preperiod)
        per = as_word(period)
        if not per:
            raise ValueError("period must be nonempty")
        n = len(per)
        for k in range(1, n):
            if n % k == 0 and per[:k] * (n // k) == per:
                per = per[:k]
                break
        while pre and pre[-1] == per[-1]:
            per = (per[-1],) + per[:-1]
            pre = pre[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    def __setattr__(self, name, value):
        raise AttributeError("Point is immutable")

    def letter(self, i: int) -> int:
        if i < len(self.preperiod):
            return self.preperiod[i]
        return self.period[(i - len(self.preperiod)) % len(self.period)]

    def prefix(self, n: int) -> Word:
        return tuple(self.letter(i) for i in range(n))

    def shift(self, n: int) -> "Point":
        """Drop the first n letters."""
        if n <= len(self.preperiod):
            return Point(self.preperiod[n:], self.period)
        k = (n - len(self.preperiod)) % len(self.period)
        return Point((), self.period[k:] + self.period[:k])

    def starts_with(self, w: Word) -> bool:
        return self.prefix(len(w)) == tuple(w)

    def __eq__(self, other):
        if not isinstance(other, Point):
            return NotImplemented
        return self.preperiod == other.preperiod and self.period == other.period

    def __hash__(self):
        return hash((self.preperiod, self.period))

    def __repr__(self):
        return format_point(self)


_POINT_RE = re.compile(r"^([0-9]*)\(([0-9]+)\)$")


def parse_point(text: str, alphabet_size: int) -> Point:
    m = _POINT_RE.match(text.strip())
    if not m:
        raise PointParseError(f"point {text!r} must look like u(v), e.g. 01(10)")
    try:
        pre = check_word(as_word(m.group(1)), alphabet_size)
        per = check_word(as_word(m.group(2)), alphabet_size)
    except ValueError as exc:
        raise PointParseError(f"point {text!r}: {exc}") from None
    return Point(pre, per)


def format_point(p: Point) -> str:
    return f"{word_text(p.preperiod)}({word_text(p.period)})"


def apply_to_point(g: Aut, x: Point) -> Point:
    """Image of a point; eventual periodicity is preserved.

    After the preperiod the acting state runs through cycle blocks; by
    pigeonhole the block-starting state repeats within machine-size many
    blocks, which yields the image's preperiod and cycle.
    """
    m = g.machine
    out, trans = m.outputs, m.transitions
    q = g.state
    head: list[int] = []
    for a in x.preperiod:
        head.append(out[q][a])
        q = trans[q][a]
    seen: dict[int, int] = {}
    blocks: list[list[int]] = []
    while q not in seen:
        seen[q] = len(blocks)
        emitted = []
        for a in x.period:
            emitted.append(out[q][a])
            q = trans[q][a]
        blocks.append(emitted)
    j = seen[q]
    for block in blocks[:j]:
        head.extend(block)
    cycle = [a for block in blocks[j:] for a in block]
    return Point(head, cycle)


def fixed_walk(g: Aut, x: Point):
    """Classify how a state relates to a point it might fix.

    Returns (status, states) where status is MOVED, INTERIOR or BOUNDARY
    and states lists the distinct restrictions met along the way (as
    states of the minimised closure machine of g).  INTERIOR means some
    finite prefix is fixed with trivial restriction below it; BOUNDARY
    means every prefix is fixed but the restriction never trivialises,
    detected by pigeonhole on (state, position in cycle).
    """
    c = g.canonical()
    m = c.machine
    out, trans = m.outputs, m.transitions
    ident = m.identity
    q = 0
    visited = {0}
    for a in x.preperiod:
        if q == ident:
            return INTERIOR, [Aut(m, s) for s in sorted(visited)]
        if out[q][a] != a:
            return MOVED, [Aut(m, s) for s in sorted(visited)]
        q = trans[q][a]
        visited.add(q)
    seen = set()
    phase = 0
    n = len(x.period)
    while True:
        if q == ident:
            return INTERIOR, [Aut(m, s) for s in sorted(visited)]
        if (q, phase) in seen:
            return BOUNDARY, [Aut(m, s) for s in sorted(visited)]
        seen.add((q, phase))
        a = x.period[phase]
        if out[q][a] != a:
            return MOVED, [Aut(m, s) for s in sorted(visited)]
        q = trans[q][a]
        visited.add(q)
        phase = (phase + 1) % n
