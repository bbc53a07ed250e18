"""Fixed-word counts against enumeration, exact measures, certificates, witnesses."""

import itertools
import random
from fractions import Fraction

import pytest

from germtrace import (
    BOUNDARY,
    Point,
    SingularSystemError,
    boundary_fixed_point,
    boundary_null_certificate,
    fixed_counts,
    fixed_counts_csv,
    fixed_walk,
    format_point,
    has_boundary_fixed_point,
    hausdorff_witness,
    interiorizable,
    is_dangerous,
    mu_fix_exact,
    parse_machine,
    parse_point,
)
from germtrace.fixedpoints import _solve_integer_system


def oracle_trivial(machine, q):
    """True iff state q acts trivially, by frontier search over raw tables.

    A nontrivial state moves some word of length at most the machine size,
    so surviving size+1 rounds of fixed-letter expansion settles it.
    """
    frontier = {q}
    for _ in range(machine.size + 1):
        nxt = set()
        for s in frontier:
            for x in range(machine.alphabet_size):
                if machine.outputs[s][x] != x:
                    return False
                nxt.add(machine.transitions[s][x])
        frontier = nxt
    return True


def oracle_counts(machine, q, depth):
    """(f_k, i_k) for k <= depth by enumerating every word, raw tables only."""
    d = machine.alphabet_size
    trivial = [oracle_trivial(machine, s) for s in range(machine.size)]
    fs = [1]
    interiors = [1 if trivial[q] else 0]
    for k in range(1, depth + 1):
        fk = ik = 0
        for w in itertools.product(range(d), repeat=k):
            s = q
            for x in w:
                if machine.outputs[s][x] != x:
                    break
                s = machine.transitions[s][x]
            else:
                fk += 1
                if trivial[s]:
                    ik += 1
        fs.append(fk)
        interiors.append(ik)
    return fs, interiors


class TestCountsAgainstEnumeration:
    def test_binary_machines(self, bundled):
        for m in bundled.values():
            for q in range(m.size):
                g = m.state(q)
                counts = fixed_counts(g, 10)
                fs, interiors = oracle_counts(m, q, 10)
                assert list(counts.fixed) == fs
                assert list(counts.interior) == interiors
                assert list(counts.live) == [f - i for f, i in zip(fs, interiors)]

    def test_ternary_machine(self, ternary):
        for q in range(ternary.size):
            counts = fixed_counts(ternary.state(q), 6)
            fs, interiors = oracle_counts(ternary, q, 6)
            assert list(counts.fixed) == fs
            assert list(counts.interior) == interiors

    def test_grigorchuk_live_column(self, grig):
        counts = fixed_counts(grig.state("d"), 10)
        assert list(counts.live) == [1, 1, 2, 2, 1, 2, 2, 1, 2, 2, 1]

    def test_identity_and_rigid_states(self, grig):
        e = fixed_counts(grig.state("e"), 6)
        assert list(e.fixed) == [2**k for k in range(7)]
        assert e.live == (0,) * 7
        a = fixed_counts(grig.state("a"), 6)
        assert list(a.fixed) == [1, 0, 0, 0, 0, 0, 0]

    def test_depth_property_and_validation(self, grig):
        counts = fixed_counts(grig.state("b"), 4)
        assert counts.depth == 4
        with pytest.raises(ValueError):
            fixed_counts(grig.state("b"), -1)


class TestCountInvariants:
    def test_sequence_shape(self, bundled, ternary):
        machines = list(bundled.values()) + [ternary]
        for m in machines:
            d = m.alphabet_size
            for g in m.states():
                counts = fixed_counts(g, 12)
                for k in range(12):
                    f0, f1 = counts.fixed[k], counts.fixed[k + 1]
                    i0, i1 = counts.interior[k], counts.interior[k + 1]
                    assert 0 <= i0 <= f0
                    assert f1 <= d * f0, "fixed fraction cannot grow"
                    assert i1 >= d * i0, "interior fraction cannot shrink"

    def test_bracket_contains_measure(self, bundled, ternary):
        machines = list(bundled.values()) + [ternary]
        for m in machines:
            d = m.alphabet_size
            for g in m.states():
                mu = mu_fix_exact(g)
                counts = fixed_counts(g, 12)
                for k in range(13):
                    assert Fraction(counts.interior[k], d**k) <= mu
                    assert mu <= Fraction(counts.fixed[k], d**k)


class TestMeasures:
    def test_grigorchuk_values(self, grig):
        expected = {
            "a": Fraction(0),
            "b": Fraction(1, 7),
            "c": Fraction(2, 7),
            "d": Fraction(4, 7),
            "e": Fraction(1),
        }
        assert {n: mu_fix_exact(grig.state(n)) for n in expected} == expected

    def test_free_actions(self, adding, lamp):
        assert mu_fix_exact(adding.state("a")) == 0
        assert mu_fix_exact(lamp.state("p")) == 0
        assert mu_fix_exact(lamp.state("q")) == 0

    def test_inverse_invariance(self, bundled):
        for m in bundled.values():
            for g in m.states():
                assert mu_fix_exact(g) == mu_fix_exact(g.inverse())

    def test_representation_independence(self, grig):
        b, c, d = grig.state("b"), grig.state("c"), grig.state("d")
        assert mu_fix_exact(b * c) == mu_fix_exact(d)
        assert mu_fix_exact(c * d * c) == mu_fix_exact(d)  # c*d*c = b*c = d

    def test_conjugation_invariance(self, grig):
        rng = random.Random(3)
        states = grig.states()
        for _ in range(15):
            g = states[rng.randrange(len(states))] * states[rng.randrange(len(states))]
            h = states[rng.randrange(len(states))]
            assert mu_fix_exact(g * h * g.inverse()) == mu_fix_exact(h)

    def test_products_outside_state_set(self, grig):
        a, d = grig.state("a"), grig.state("d")
        ad = a * d
        mu = mu_fix_exact(ad)
        counts = fixed_counts(ad, 12)
        for k in range(13):
            assert Fraction(counts.interior[k], 2**k) <= mu <= Fraction(counts.fixed[k], 2**k)


class TestSolver:
    def test_matches_naive_gaussian(self):
        rng = random.Random(42)
        for _ in range(25):
            n = rng.randint(1, 6)
            matrix = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
            rhs = [rng.randint(-9, 9) for _ in range(n)]
            try:
                got = _solve_integer_system(
                    [row[:] for row in matrix], rhs[:]
                )
            except SingularSystemError:
                assert _naive_solve(matrix, rhs) is None
                continue
            want = _naive_solve(matrix, rhs)
            assert want is not None
            assert list(got) == want

    def test_singular_raises(self):
        with pytest.raises(SingularSystemError):
            _solve_integer_system([[1, 2], [2, 4]], [1, 1])


def _naive_solve(matrix, rhs):
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col] / a[col][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[r][n] / a[r][r] for r in range(n)]


class TestCertificates:
    def test_holds_for_bundled_states(self, bundled, ternary):
        for m in list(bundled.values()) + [ternary]:
            for g in m.states():
                cert = boundary_null_certificate(g)
                assert cert.holds
                assert cert.alphabet_size == m.alphabet_size
                assert cert.depth >= 1
                assert len(cert.checks) >= 1
                for k, count, bound in cert.checks:
                    assert count <= bound

    def test_grigorchuk_depth_and_bounds(self, grig):
        cert = boundary_null_certificate(grig.state("d"))
        assert cert.depth == 3
        ks = [k for k, _, _ in cert.checks]
        assert ks == list(range(1, len(ks) + 1))
        counts = fixed_counts(grig.state("d"), 3 * len(ks))
        for k, count, bound in cert.checks:
            assert count == counts.live[3 * k]
            assert bound == (2**3 - 1) ** k

    def test_check_count_override(self, grig):
        cert = boundary_null_certificate(grig.state("b"), max_checks=4)
        assert len(cert.checks) == 4


class TestInteriorizable:
    def test_grigorchuk(self, grig):
        assert not interiorizable(grig.state("a"))
        for name in "bcde":
            assert interiorizable(grig.state(name))
        # witness for b: the cylinder at 110 is fixed with trivial action below
        b = grig.state("b")
        assert b.apply_word((1, 1, 0)) == (1, 1, 0)
        assert b.restrict((1, 1, 0)).is_identity()

    def test_free_machines_have_none(self, adding, lamp):
        assert not interiorizable(adding.state("a"))
        assert not interiorizable(lamp.state("p"))
        assert not interiorizable(lamp.state("q"))
        assert interiorizable(adding.state("e"))


class TestBoundaryFixedPoints:
    def test_grigorchuk(self, grig):
        x = boundary_fixed_point(grig.state("d"))
        assert x is not None
        status, _ = fixed_walk(grig.state("d"), x)
        assert status == BOUNDARY
        assert boundary_fixed_point(grig.state("a")) is None
        assert boundary_fixed_point(grig.state("e")) is None
        assert has_boundary_fixed_point(grig.state("b"))

    def test_lamplighter(self, lamp):
        x = boundary_fixed_point(lamp.state("p"))
        assert x is not None
        status, _ = fixed_walk(lamp.state("p"), x)
        assert status == BOUNDARY

    def test_everywhere_moving_state(self, adding):
        assert boundary_fixed_point(adding.state("a")) is None
        assert not has_boundary_fixed_point(adding.state("a"))


class TestHausdorffWitness:
    def test_grigorchuk_returns_d_at_all_ones(self, grig):
        witness = hausdorff_witness(grig)
        assert witness is not None
        g, x = witness
        assert g == grig.state("d")
        assert x == Point((), (1,))
        status, visited = fixed_walk(g, x)
        assert status == BOUNDARY
        assert all(interiorizable(v) for v in visited)

    def test_hausdorff_machines_return_none(self, adding, lamp):
        assert hausdorff_witness(adding) is None
        assert hausdorff_witness(lamp) is None

    def test_ternary_witness(self, ternary):
        witness = hausdorff_witness(ternary)
        assert witness is not None
        g, x = witness
        assert g == ternary.state("u")
        assert x == Point((), (1,))


class TestDangerous:
    def test_grigorchuk_points(self, grig):
        assert is_dangerous(grig, parse_point("(1)", 2))
        assert is_dangerous(grig, parse_point("0(1)", 2))
        assert is_dangerous(grig, parse_point("10(1)", 2))
        assert not is_dangerous(grig, parse_point("(0)", 2))
        assert not is_dangerous(grig, parse_point("01(10)", 2))

    def test_boundary_without_interior_is_safe(self, lamp):
        # p fixes (0) forever but nothing trivializes, so no germ ambiguity
        assert not is_dangerous(lamp, parse_point("(0)", 2))
        assert not is_dangerous(lamp, parse_point("(1)", 2))

    def test_free_machine(self, adding):
        for text in ["(0)", "(1)", "01(10)"]:
            assert not is_dangerous(adding, parse_point(text, 2))


class TestCsv:
    def test_golden_prefix(self, grig):
        csv = fixed_counts_csv(fixed_counts(grig.state("d"), 3))
        lines = csv.splitlines()
        assert lines[0] == "k,f_k,i_k,P_k,P_k_over_dk_num,P_k_over_dk_den,P_k_over_dk_float"
        assert lines[1] == "0,1,0,1,1,1,1.0"
        assert lines[2] == "1,2,1,1,1,2,0.5"
        assert lines[3] == "2,4,2,2,1,2,0.5"
        assert lines[4] == "3,6,4,2,1,4,0.25"
        assert csv.endswith("\n")


class TestDegenerate:
    def test_identity_only_machine(self):
        m = parse_machine("alphabet 2\nstate z perm 0 1 to z z\n")
        g = m.state("z")
        assert g.is_identity()
        assert mu_fix_exact(g) == 1
        assert boundary_null_certificate(g).holds
        assert hausdorff_witness(m) is None
