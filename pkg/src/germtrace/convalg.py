"""Exact convolution algebra spanned by indicators of cylinder shifts.

An element is a finite Gaussian-rational combination of indicators of
basis shifts and represents a function on germs.  Convolution, adjoint
and evaluation are exact; is_zero decides function equality (distinct
term lists can represent the same function when the germ space is not
Hausdorff) and is_singular decides whether the nonzero-germ set sits
over a meagre part of the boundary.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, ElementParseError, ParseError, PatternCapError
from .germs import Germ, PartialMap, bisection_product, unit_germ
from .mealy import Aut, Machine, Word, identity_aut, word_text
from .points import Point

_DEFAULT_PATTERN_CAP = 10 ** 6
_pattern_cap = _DEFAULT_PATTERN_CAP


def set_pattern_cap(n: int) -> None:
    global _pattern_cap
    if n < 1:
        raise ValueError("pattern cap must be positive")
    _pattern_cap = n


def get_pattern_cap() -> int:
    return _pattern_cap


# ---------------------------------------------------------------------------
# scalars

def _frac_text(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


@dataclass(frozen=True)
class Scalar:
    """Gaussian rational re + im*i with exact arithmetic."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def conjugate(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def __add__(self, other):
        other = as_scalar(other)
        return Scalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-as_scalar(other))

    def __rsub__(self, other):
        return as_scalar(other) + (-self)

    def __mul__(self, other):
        other = as_scalar(other)
        return Scalar(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Scalar({format_scalar(self)!r})"


ZERO = Scalar()
ONE = Scalar(Fraction(1))


def as_scalar(v) -> Scalar:
    if isinstance(v, Scalar):
        return v
    if isinstance(v, (int, Fraction)):
        return Scalar(Fraction(v))
    raise TypeError(f"cannot interpret {v!r} as a scalar")


_NUM_RE = re.compile(r"(-?[0-9]+)(?:/([0-9]+))?")


def parse_scalar(text: str) -> Scalar:
    """Parse forms like 4/7, -2, 1/2+3i, -i, 2/5i."""
    s = text.strip()
    if not s:
        raise ElementParseError("empty scalar")
    pos = 0
    re_part = Fraction(0)
    im_part = Fraction(0)
    seen_re = seen_im = False
    while pos < len(s):
        if seen_im:
            raise ElementParseError(
                f"bad scalar {text!r}: imaginary part must come last")
        if seen_re and s[pos] not in "+-":
            raise ElementParseError(f"bad scalar {text!r}")
        sign = 1
        if s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
        if pos < len(s) and s[pos] == "i":
            value, imag = Fraction(1), True
            pos += 1
        else:
            m = _NUM_RE.match(s, pos)
            if not m or m.start() != pos:
                raise ElementParseError(f"bad scalar {text!r}")
            den = int(m.group(2)) if m.group(2) else 1
            if den == 0:
                raise ElementParseError(f"bad scalar {text!r}: zero denominator")
            value = Fraction(int(m.group(1)), den)
            pos = m.end()
            imag = pos < len(s) and s[pos] == "i"
            if imag:
                pos += 1
        if imag:
            im_part = sign * value
            seen_im = True
        else:
            if seen_re:
                raise ElementParseError(f"bad scalar {text!r}: two real parts")
            re_part = sign * value
            seen_re = True
    return Scalar(re_part, im_part)


def format_scalar(s: Scalar) -> str:
    if s.is_zero():
        return "0"
    out = ""
    if s.re:
        out = _frac_text(s.re)
    if s.im:
        mag = _frac_text(abs(s.im))
        core = "i" if mag == "1" else mag + "i"
        if not out:
            out = core if s.im > 0 else "-" + core
        else:
            out += ("+" if s.im > 0 else "-") + core
    return out


# ---------------------------------------------------------------------------
# elements

class AlgebraElement:
    """Finite Gaussian-rational combination of cylinder-shift indicators.

    Terms are kept canonical: shifts merged under canonical state
    equality, zero coefficients dropped.  Equality of AlgebraElement
    objects is termwise; use equals (is_zero of the difference) for
    equality as functions on germs.
    """

    __slots__ = ("machine", "terms")

    def __init__(self, machine: Machine, terms=()):
        acc: dict[PartialMap, Scalar] = {}
        if isinstance(terms, Mapping):
            terms = [(coeff, pmap) for pmap, coeff in terms.items()]
        for coeff, pmap in terms:
            if not isinstance(pmap, PartialMap):
                raise TypeError("term must be (scalar, PartialMap)")
            if pmap.alphabet_size != machine.alphabet_size:
                raise DomainError("term alphabet does not match the machine")
            c = acc.get(pmap, ZERO) + as_scalar(coeff)
            acc[pmap] = c
        self.machine = machine
        self.terms = {b: c for b, c in acc.items() if not c.is_zero()}

    @property
    def alphabet_size(self) -> int:
        return self.machine.alphabet_size

    def term_list(self) -> list[tuple[Scalar, PartialMap]]:
        return [(c, b) for b, c in self.terms.items()]

    def is_termwise_zero(self) -> bool:
        return not self.terms

    def _require_compatible(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            raise TypeError("expected an AlgebraElement")
        if other.alphabet_size != self.alphabet_size:
            raise DomainError("elements live over different alphabets")

    def __add__(self, other):
        self._require_compatible(other)
        return AlgebraElement(self.machine,
                              self.term_list() + other.term_list())

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return AlgebraElement(self.machine,
                              [(-c, b) for c, b in self.term_list()])

    def scale(self, coeff) -> "AlgebraElement":
        c = as_scalar(coeff)
        return AlgebraElement(self.machine,
                              [(c * t, b) for t, b in self.term_list()])

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            return self.scale(other)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            return self.scale(other)
        self._require_compatible(other)
        out = []
        for b1, c1 in self.terms.items():
            for b2, c2 in other.terms.items():
                for piece in bisection_product(b1, b2):
                    out.append((c1 * c2, piece))
        return AlgebraElement(self.machine, out)

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.machine,
                              [(c.conjugate(), b.inverse())
                               for c, b in self.term_list()])

    def evaluate(self, germ: Germ) -> Scalar:
        """Value of the represented function at a germ."""
        total = ZERO
        for b, c in self.terms.items():
            if b.contains_base(germ.base) and b.germ_at(germ.base) == germ:
                total = total + c
        return total

    def unit_restriction_eval(self, x: Point) -> Scalar:
        """E(a)(x): the value at the unit germ over x."""
        return self.evaluate(unit_germ(self.alphabet_size, x))

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return (self.alphabet_size == other.alphabet_size
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.alphabet_size,
                     frozenset((b, c.re, c.im) for b, c in self.terms.items())))

    def is_zero(self, cap: int | None = None) -> bool:
        """Exactly decide whether the element vanishes at every germ."""
        for class_sums, _ in _realizable_class_sums(self, cap):
            if any(not s.is_zero() for s in class_sums):
                return False
        return True

    def is_singular(self, cap: int | None = None) -> bool:
        """True iff the germs where the element is nonzero sit over a meagre set.

        Each realizable coincidence pattern is nonzero on a locally
        closed region, and a locally closed region is nowhere dense
        unless it contains a whole cylinder, so the element is singular
        exactly when no pattern with a nonzero class sum does.
        """
        for class_sums, has_open in _realizable_class_sums(self, cap):
            if has_open and any(not s.is_zero() for s in class_sums):
                return False
        return True

    def equals(self, other: "AlgebraElement", cap: int | None = None) -> bool:
        """Extensional equality: the difference vanishes at every germ."""
        return (self - other).is_zero(cap)

    def __repr__(self):
        text = format_element(self).replace("\n", "; ")
        return f"<element {text or '0'}>"


def unit_element(machine: Machine) -> AlgebraElement:
    return indicator(machine, identity_aut(machine.alphabet_size), (), (), "e")


def indicator(machine: Machine, state, range_prefix=(), source_prefix=(),
              label: str | None = None) -> AlgebraElement:
    """1 times the indicator of the shift (state, range_prefix, source_prefix)."""
    if isinstance(state, str):
        label = label if label is not None else state
        state = machine.state(state)
    elif isinstance(state, int):
        label = label if label is not None else machine.name_of(state)
        state = machine.state(state)
    pmap = PartialMap(state, range_prefix, source_prefix, label)
    return AlgebraElement(machine, [(ONE, pmap)])


# ---------------------------------------------------------------------------
# the coincidence-pattern search behind is_zero / is_singular

def _refined_groups(elem: AlgebraElement):
    """Split terms to a common source depth and bucket by (source, range).

    Within one bucket the states are pairwise canonically distinct, and
    germs from different buckets are never equal (different base
    cylinder or different image cylinder), so each bucket is analysed on
    its own.
    """
    if not elem.terms:
        return []
    d = elem.alphabet_size
    depth = max(len(b.source_prefix) for b in elem.terms)
    buckets: dict[tuple[Word, Word], dict[Aut, Scalar]] = {}
    for b, c in elem.terms.items():
        for w in itertools.product(range(d), repeat=depth - len(b.source_prefix)):
            rb = b.restrict_source(w)
            bucket = buckets.setdefault((rb.source_prefix, rb.range_prefix), {})
            bucket[rb.state] = bucket.get(rb.state, ZERO) + c
    out = []
    for key in sorted(buckets):
        cleaned = [(s, c) for s, c in buckets[key].items() if not c.is_zero()]
        if cleaned:
            out.append(cleaned)
    return out


_TRIVIAL = "T"
_BROKEN = "B"


def _joint_walk(states: list[Aut], cap: int):
    """Explore the joint pairwise-quotient walk over all input letters.

    Component (i, j) follows the state of q_j^{-1} q_i and absorbs to T
    when the quotient trivializes (germs of i and j agree on the whole
    subtree) or to B when it moves a letter (germs disagree below).
    Returns (reachable joint states, per-letter successor table).
    """
    d = states[0].machine.alphabet_size
    pairs = [(i, j) for i in range(len(states)) for j in range(i + 1, len(states))]
    machines = []
    for i, j in pairs:
        machines.append((states[j].inverse() * states[i]).canonical().machine)

    def advance(tok, m, x):
        if tok is _TRIVIAL or tok is _BROKEN:
            return tok
        if m.outputs[tok][x] != x:
            return _BROKEN
        t = m.transitions[tok][x]
        return _TRIVIAL if t == m.identity else t

    start = tuple(_TRIVIAL if m.identity == 0 else 0 for m in machines)
    seen = {start}
    queue = [start]
    succ: dict[tuple, list[tuple]] = {}
    while queue:
        joint = queue.pop()
        row = []
        for x in range(d):
            nxt = tuple(advance(tok, m, x) for tok, m in zip(joint, machines))
            row.append(nxt)
            if nxt not in seen:
                if len(seen) >= cap:
                    raise PatternCapError(
                        f"pattern search exceeded {cap} joint states; "
                        "raise the pattern cap to decide this element")
                seen.add(nxt)
                queue.append(nxt)
        succ[joint] = row
    return pairs, seen, succ


def _tset(joint, pairs) -> frozenset:
    return frozenset(p for tok, p in zip(joint, pairs) if tok is _TRIVIAL)


def _realizable_class_sums(elem: AlgebraElement, cap: int | None):
    """Yield (coefficient sums per germ class, region contains a cylinder).

    One item per realizable coincidence pattern per bucket.  A pattern
    records which term pairs have equal germs; it is realizable iff some
    reachable joint state shows it and can run forever without a new
    coincidence, and its region contains a cylinder iff some such state
    can never be forced into one.
    """
    if cap is None:
        cap = _pattern_cap
    for bucket in _refined_groups(elem):
        states = [s for s, _ in bucket]
        coeffs = [c for _, c in bucket]
        pairs, seen, succ = _joint_walk(states, cap)
        d = elem.alphabet_size

        by_tset: dict[frozenset, set] = {}
        for joint in seen:
            by_tset.setdefault(_tset(joint, pairs), set()).add(joint)

        # joint states from which a further coincidence is reachable
        can_grow = set()
        changed = True
        while changed:
            changed = False
            for joint in seen:
                if joint in can_grow:
                    continue
                base = _tset(joint, pairs)
                for x in range(d):
                    nxt = succ[joint][x]
                    if nxt in can_grow or _tset(nxt, pairs) != base:
                        can_grow.add(joint)
                        changed = True
                        break

        for tset in sorted(by_tset, key=sorted):
            members = by_tset[tset]
            alive = set(members)
            changed = True
            while changed:
                changed = False
                for joint in list(alive):
                    if not any(succ[joint][x] in alive for x in range(d)):
                        alive.discard(joint)
                        changed = True
            if not alive:
                continue
            sums = _class_sums(len(states), coeffs, tset)
            has_open = any(joint not in can_grow for joint in members)
            yield sums, has_open


def _class_sums(n: int, coeffs: list[Scalar], tset: frozenset) -> list[Scalar]:
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in tset:
        parent[find(i)] = find(j)
    sums: dict[int, Scalar] = {}
    for i, c in enumerate(coeffs):
        r = find(i)
        sums[r] = sums.get(r, ZERO) + c
    return list(sums.values())


# ---------------------------------------------------------------------------
# text format

def parse_shift(machine: Machine, text: str) -> PartialMap:
    """Parse the shift syntax <state-expr>:<u>><v> into a PartialMap."""
    from .mealy import parse_state_expr
    shift_text = text.strip()
    if ":" not in shift_text:
        raise ElementParseError(f"shift {shift_text!r}: missing ':'")
    expr_text, _, words = shift_text.partition(":")
    if words.count(">") != 1:
        raise ElementParseError(f"shift {shift_text!r}: needs exactly one '>'")
    u_text, _, v_text = words.partition(">")
    try:
        state = parse_state_expr(machine, expr_text)
        u = _parse_word(u_text, machine.alphabet_size)
        v = _parse_word(v_text, machine.alphabet_size)
        return PartialMap(state, u, v, expr_text.strip())
    except ElementParseError:
        raise
    except (ParseError, DomainError, ValueError) as exc:
        raise ElementParseError(f"shift {shift_text!r}: {exc}") from exc


def parse_element(machine: Machine, text: str) -> AlgebraElement:
    """Parse one term per line (or semicolon): <scalar> <state-expr>:<u>><v>."""
    terms = []
    for raw in re.split(r"[\n;]", text):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        split = line.split(None, 1)
        if len(split) != 2:
            raise ElementParseError(f"term {line!r}: expected '<scalar> <shift>'")
        coeff_text, shift_text = split
        coeff = parse_scalar(coeff_text)
        terms.append((coeff, parse_shift(machine, shift_text)))
    return AlgebraElement(machine, terms)


def _parse_word(text: str, d: int) -> Word:
    text = text.strip()
    if not all(ch.isdigit() for ch in text):
        raise ValueError(f"bad word {text!r}")
    w = tuple(int(ch) for ch in text)
    if any(x >= d for x in w):
        raise ValueError(f"word {text!r} has letters outside the alphabet")
    return w


def _term_label(machine: Machine, pmap: PartialMap) -> str:
    for q in range(machine.size):
        if machine.state(q) == pmap.state:
            return machine.name_of(q)
    if pmap.label is not None:
        return pmap.label
    raise DomainError("term state has no printable name; supply a label")


def _term_sort_key(machine: Machine, label: str):
    try:
        return (0, machine.index_of(label))
    except DomainError:
        return (1, label)


def format_element(elem: AlgebraElement) -> str:
    """Canonical text: terms sorted by (source, range, state)."""
    rows = []
    for pmap, coeff in elem.terms.items():
        label = _term_label(elem.machine, pmap)
        rows.append((pmap.source_prefix, pmap.range_prefix,
                     _term_sort_key(elem.machine, label), label, coeff, pmap))
    rows.sort(key=lambda r: r[:3])
    lines = [f"{format_scalar(coeff)} {label}:"
             f"{word_text(pmap.range_prefix)}>{word_text(pmap.source_prefix)}"
             for _, _, _, label, coeff, pmap in rows]
    return "\n".join(lines)
