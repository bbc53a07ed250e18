"""Shared fixtures: bundled machines, an inline ternary machine, random elements."""

from __future__ import annotations

import random
from fractions import Fraction
from importlib import resources

import pytest

from germtrace import (
    AlgebraElement,
    Machine,
    PartialMap,
    Scalar,
    get_pattern_cap,
    get_state_cap,
    parse_machine,
    set_pattern_cap,
    set_state_cap,
)


@pytest.fixture(autouse=True)
def _restore_caps():
    state_cap, pattern_cap = get_state_cap(), get_pattern_cap()
    yield
    set_state_cap(state_cap)
    set_pattern_cap(pattern_cap)


def _bundled(name: str) -> Machine:
    text = resources.files("germtrace.data").joinpath(f"{name}.gt").read_text()
    return parse_machine(text)


@pytest.fixture(scope="session")
def grig() -> Machine:
    return _bundled("grigorchuk")


@pytest.fixture(scope="session")
def adding() -> Machine:
    return _bundled("adding")


@pytest.fixture(scope="session")
def lamp() -> Machine:
    return _bundled("lamplighter")


@pytest.fixture(scope="session")
def bundled(grig, adding, lamp) -> dict[str, Machine]:
    return {"grigorchuk": grig, "adding": adding, "lamplighter": lamp}


TERNARY_TEXT = """\
alphabet 3
state s perm 1 2 0 to e s t
state t perm 0 2 1 to s e t
state u perm 0 1 2 to t u e
"""


@pytest.fixture(scope="session")
def ternary() -> Machine:
    return parse_machine(TERNARY_TEXT)


def random_word(rng: random.Random, d: int, length: int) -> tuple[int, ...]:
    return tuple(rng.randrange(d) for _ in range(length))


def random_scalar(rng: random.Random, complex_ok: bool = True) -> Scalar:
    def frac() -> Fraction:
        return Fraction(rng.randint(-3, 3), rng.randint(1, 4))

    re = frac()
    im = frac() if complex_ok and rng.random() < 0.5 else Fraction(0)
    if re == 0 and im == 0:
        re = Fraction(1)
    return Scalar(re, im)


def random_element(
    machine: Machine,
    rng: random.Random,
    max_terms: int = 3,
    max_depth: int = 2,
    complex_ok: bool = True,
    diagonal: bool = False,
    off_diagonal: bool = False,
) -> AlgebraElement:
    """Random span element of shift indicators with small rational coefficients."""
    d = machine.alphabet_size
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        state = machine.state(rng.randrange(machine.size))
        length = rng.randint(0, max_depth)
        v = random_word(rng, d, length)
        if diagonal:
            u = v
        else:
            u = random_word(rng, d, length)
            if off_diagonal:
                while u == v:
                    length = max(1, length)
                    v = random_word(rng, d, length)
                    u = random_word(rng, d, length)
        label = machine.name_of(state.state)
        pm = PartialMap(state, u, v, label=label)
        terms[pm] = terms.get(pm, Scalar(Fraction(0))) + random_scalar(rng, complex_ok)
    return AlgebraElement(machine, terms)


# Acceptance criteria report one line each at the end of the run.
ACCEPTANCE_RESULTS: list[tuple[int, str, str, str]] = []


def record_criterion(number: int, title: str, status: str, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((number, title, status, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(ACCEPTANCE_RESULTS):
        line = f"criterion {number:2d} [{status}] {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
