"""Exact traces, isotropy sums and truncated representation matrices.

Two functionals live here: the canonical trace integrates the element's
restriction to unit germs (per diagonal term, the interior fixed
measure), and the isotropy trace integrates the sum over all isotropy
germs (per diagonal term, the full fixed measure).  Boundary-null decay
makes the two fixed measures one rational, so the traces agree; the
code still routes them through separate formulas and certifies the
decay rather than assuming it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .convalg import ZERO, AlgebraElement, Scalar
from .errors import DomainError
from .fixedpoints import boundary_null_certificate, mu_fix_exact
from .germs import Germ, isotropy_germs_at, unit_germ
from .mealy import Aut
from .points import Point


def _interior_fix_measure(state: Aut) -> Fraction:
    """mu(int Fix): what the unit-germ set of a diagonal shift weighs."""
    return mu_fix_exact(state)


def _total_fix_measure(state: Aut) -> Fraction:
    """mu(Fix): what the isotropy-germ set of a diagonal shift weighs.

    Equal to the interior measure because the boundary decays to null;
    the decay certificate is checked (once per canonical machine) so the
    equality is witnessed, not assumed.
    """
    c = state.canonical()
    memo = c.machine._memo
    if "boundary_null" not in memo:
        memo["boundary_null"] = all(
            boundary_null_certificate(c.machine.state(q)).holds
            for q in range(c.machine.size))
    if not memo["boundary_null"]:
        raise DomainError("boundary decay certificate failed")
    return mu_fix_exact(c)


def _diagonal_sum(a: AlgebraElement, measure) -> Scalar:
    total = ZERO
    d = a.alphabet_size
    for pmap, coeff in a.terms.items():
        if pmap.range_prefix != pmap.source_prefix:
            continue
        weight = Fraction(measure(pmap.state), d ** len(pmap.source_prefix))
        total = total + coeff * Scalar(weight)
    return total


def canonical_trace(a: AlgebraElement) -> Scalar:
    """Integral of the element over unit germs against Bernoulli measure."""
    return _diagonal_sum(a, _interior_fix_measure)


def isotropy_trace(a: AlgebraElement) -> Scalar:
    """Integral over the boundary of the sum over all isotropy germs."""
    return _diagonal_sum(a, _total_fix_measure)


def F_eval(a: AlgebraElement, x: Point, depth_cap: int | None = None) -> Scalar:
    """Sum of the element over the isotropy germs at one point.

    Candidates are the unit germ, the machine-state isotropy germs up to
    depth_cap, and the element's own diagonal germs at x; the last group
    makes the sum exact even when a term's state is a composite outside
    the machine.  Candidates are deduplicated before summing.
    """
    if depth_cap is None:
        depth_cap = max((len(b.source_prefix) for b in a.terms), default=0)
    candidates: list[Germ] = [unit_germ(a.alphabet_size, x)]
    for g in isotropy_germs_at(x, a.machine, depth_cap):
        if not any(g == h for h in candidates):
            candidates.append(g)
    for pmap in a.terms:
        if not pmap.contains_base(x):
            continue
        g = pmap.germ_at(x)
        if g.range() == x and not any(g == h for h in candidates):
            candidates.append(g)
    total = ZERO
    for g in candidates:
        total = total + a.evaluate(g)
    return total


def isotropy_defect(a: AlgebraElement, x: Point,
                    depth_cap: int | None = None) -> Scalar:
    """F(a)(x) - E(a)(x): the mass on non-unit isotropy germs at x."""
    return F_eval(a, x, depth_cap) - a.unit_restriction_eval(x)


def check_tracial(a: AlgebraElement, b: AlgebraElement) -> bool:
    ab, ba = a * b, b * a
    return (canonical_trace(ab) == canonical_trace(ba)
            and isotropy_trace(ab) == isotropy_trace(ba))


def check_positive(a: AlgebraElement) -> bool:
    t = canonical_trace(a.adjoint() * a)
    return t.is_real() and t.re >= 0


# ---------------------------------------------------------------------------
# truncated quasi-regular representation

@dataclass(frozen=True)
class RepMatrix:
    """Matrix of an element on a germ basis with common source.

    closed reports whether every term of the element maps every basis
    germ back into the basis; only then is the truncation multiplicative.
    """

    labels: tuple[str, ...]
    entries: tuple[tuple[Scalar, ...], ...]
    closed: bool

    @property
    def size(self) -> int:
        return len(self.labels)

    def product(self, other: "RepMatrix") -> "RepMatrix":
        if self.labels != other.labels:
            raise DomainError("matrices use different bases")
        n = self.size
        rows = tuple(
            tuple(sum((self.entries[i][k] * other.entries[k][j]
                       for k in range(n)), ZERO) for j in range(n))
            for i in range(n))
        return RepMatrix(self.labels, rows, self.closed and other.closed)

    def conjugate_transpose(self) -> "RepMatrix":
        n = self.size
        rows = tuple(tuple(self.entries[j][i].conjugate() for j in range(n))
                     for i in range(n))
        return RepMatrix(self.labels, rows, self.closed)


def _dedup_germs(germs) -> list[Germ]:
    out: list[Germ] = []
    for g in germs:
        if not any(g == h for h in out):
            out.append(g)
    return out


def _germ_label(g: Germ, i: int) -> str:
    lab = g.map.label
    u, v = g.map.range_prefix, g.map.source_prefix
    if lab is None:
        lab = f"g{i}"
    if u or v:
        from .mealy import word_text
        return f"{lab}:{word_text(u)}>{word_text(v)}"
    return lab


def rep_matrix(a: AlgebraElement, x: Point, basis: list[Germ],
               iso=()) -> RepMatrix:
    """Matrix coefficients entry(i, j) = sum over h of a(g_i h g_j^{-1}).

    basis germs must all have source x; iso, when nonempty, must be a
    finite set of isotropy germs at x closed under composition and
    inverse (the unit is adjoined automatically), and the matrix then
    acts on the basis germs' cosets.
    """
    for g in basis:
        if g.source() != x:
            raise DomainError("basis germ does not have source x")
    if not basis:
        raise DomainError("basis must be nonempty")
    unit = unit_germ(a.alphabet_size, x)
    subgroup = _dedup_germs([unit, *iso])
    for h in subgroup:
        if h.source() != x or h.range() != x:
            raise DomainError("iso germ is not isotropy at x")
    for h1 in subgroup:
        for h2 in subgroup:
            prod = h1.compose(h2)
            if not any(prod == h for h in subgroup):
                raise DomainError("iso germs are not closed under composition")
        if not any(h1.inverse() == h for h in subgroup):
            raise DomainError("iso germs are not closed under inverse")

    entries = []
    for gi in basis:
        row = []
        for gj in basis:
            total = ZERO
            for h in subgroup:
                germ = gi.compose(h).compose(gj.inverse())
                total = total + a.evaluate(germ)
            row.append(total)
        entries.append(tuple(row))

    closed = True
    for pmap in a.terms:
        for gj in basis:
            r = gj.range()
            if not pmap.contains_base(r):
                continue
            image = pmap.germ_at(r).compose(gj)
            if not any(image == g for g in basis):
                closed = False
    labels = tuple(_germ_label(g, i) for i, g in enumerate(basis))
    return RepMatrix(labels, tuple(entries), closed)
