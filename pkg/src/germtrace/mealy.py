"""Finite Mealy automata acting on the rooted tree of words by automorphisms.

A machine over the alphabet {0, .., d-1} is a finite set of states, each
carrying an output permutation of the letters and one successor state per
letter.  A state rewrites the first letter of a word through its output
permutation and hands the tail to the successor for that letter; since
outputs are bijections, every state acts as an automorphism of the tree
of finite words and of its boundary.

Products and inverses are materialised as reachable product / inverse
machines, minimised at once, and interned: two automorphisms are equal
iff they intern to the identical machine object.  That makes equality,
hashing and identity tests cheap for every higher layer.
"""

from __future__ import annotations

import re
import threading

from .errors import DomainError, MachineParseError, ParseError, StateCapError

Word = tuple[int, ...]

_DEFAULT_STATE_CAP = 100_000
_state_cap = _DEFAULT_STATE_CAP


def set_state_cap(n: int) -> None:
    """Set the global bound on states materialised per derived machine."""
    global _state_cap
    if n < 1:
        raise ValueError("state cap must be positive")
    _state_cap = n


def get_state_cap() -> int:
    return _state_cap


def as_word(w) -> Word:
    """Coerce a digit string or an iterable of letters to a word tuple."""
    if isinstance(w, str):
        if not all(c.isdigit() for c in w):
            raise ValueError(f"word {w!r} must consist of digits")
        return tuple(int(c) for c in w)
    return tuple(int(x) for x in w)


def word_text(w: Word) -> str:
    if any(x > 9 for x in w):
        raise ValueError("textual words support alphabets of at most 10 letters")
    return "".join(str(x) for x in w)


def check_word(w: Word, alphabet_size: int) -> Word:
    for x in w:
        if not 0 <= x < alphabet_size:
            raise ValueError(f"letter {x} outside alphabet of size {alphabet_size}")
    return w


class Machine:
    """An immutable Mealy automaton; states index into parallel tables."""

    __slots__ = ("alphabet_size", "outputs", "transitions", "identity", "names",
                 "table_hash", "canonical", "_memo")

    def __init__(self, alphabet_size, outputs, transitions, identity=None,
                 names=None, _canonical=False):
        d = int(alphabet_size)
        if d < 2:
            raise ValueError("alphabet must have at least two letters")
        outputs = tuple(tuple(row) for row in outputs)
        transitions = tuple(tuple(row) for row in transitions)
        n = len(outputs)
        if n == 0 or len(transitions) != n:
            raise ValueError("machine needs matching, nonempty state tables")
        letters = tuple(range(d))
        for q in range(n):
            if tuple(sorted(outputs[q])) != letters:
                raise ValueError(f"output row of state {q} is not a permutation")
            if len(transitions[q]) != d or not all(0 <= t < n for t in transitions[q]):
                raise ValueError(f"transition row of state {q} is malformed")
        if identity is not None:
            if outputs[identity] != letters or any(t != identity for t in transitions[identity]):
                raise ValueError("designated identity state does not act trivially")
        if names is not None:
            names = tuple(names)
            if len(names) != n or len(set(names)) != n:
                raise ValueError("state names must be unique and cover all states")
        self.alphabet_size = d
        self.outputs = outputs
        self.transitions = transitions
        self.identity = identity
        self.names = names
        self.table_hash = hash((d, outputs, transitions))
        self.canonical = _canonical
        self._memo = {}

    @property
    def size(self) -> int:
        return len(self.outputs)

    def name_of(self, q: int) -> str:
        if self.names is not None:
            return self.names[q]
        return f"q{q}"

    def index_of(self, name: str) -> int:
        if self.names is None or name not in self.names:
            raise DomainError(f"unknown state name {name!r}")
        return self.names.index(name)

    def state(self, ref) -> "Aut":
        """State handle by name or index."""
        if isinstance(ref, str):
            ref = self.index_of(ref)
        if not 0 <= ref < self.size:
            raise DomainError(f"state index {ref} out of range")
        return Aut(self, ref)

    def states(self) -> list["Aut"]:
        return [Aut(self, q) for q in range(self.size)]

    def __repr__(self):
        return f"<Machine {self.size} states / {self.alphabet_size} letters>"


_intern_lock = threading.Lock()
_interned: dict[tuple, Machine] = {}


def _intern(d, outputs, transitions) -> Machine:
    key = (d, outputs, transitions)
    with _intern_lock:
        m = _interned.get(key)
        if m is None:
            letters = tuple(range(d))
            identity = None
            for q in range(len(outputs)):
                if outputs[q] == letters and all(t == q for t in transitions[q]):
                    identity = q
                    break
            m = Machine(d, outputs, transitions, identity=identity, _canonical=True)
            _interned[key] = m
    return m


def _explore(d, start, out_fn, trans_fn, cap):
    """Breadth-first closure of an implicitly given machine.

    Returns dense output/transition tables; the start maps to index 0.
    States may be arbitrary hashable labels.
    """
    cap = cap if cap is not None else _state_cap
    index = {start: 0}
    order = [start]
    outputs = []
    transitions = []
    pos = 0
    while pos < len(order):
        q = order[pos]
        pos += 1
        outputs.append(tuple(out_fn(q)))
        row = []
        for x in range(d):
            t = trans_fn(q, x)
            j = index.get(t)
            if j is None:
                if len(order) >= cap:
                    raise StateCapError(
                        f"more than {cap} states while closing a machine")
                j = len(order)
                index[t] = j
                order.append(t)
            row.append(j)
        transitions.append(tuple(row))
    return outputs, transitions


def _refine(d, outputs, transitions, members):
    """Coarsest bisimulation on the given states; returns state -> block id.

    Blocks are numbered by first occurrence in `members`, so the result is
    deterministic.  Two states land in one block iff they define the same
    tree automorphism.
    """
    block = {}
    seen = {}
    for q in members:
        sig = outputs[q]
        if sig not in seen:
            seen[sig] = len(seen)
        block[q] = seen[sig]
    nblocks = len(seen)
    while True:
        seen = {}
        nxt = {}
        for q in members:
            sig = (block[q], tuple(block[transitions[q][x]] for x in range(d)))
            if sig not in seen:
                seen[sig] = len(seen)
            nxt[q] = seen[sig]
        if len(seen) == nblocks:
            return nxt
        block = nxt
        nblocks = len(seen)


def _canonical_from_tables(d, outputs, transitions, start) -> "Aut":
    members = list(range(len(outputs)))
    block = _refine(d, outputs, transitions, members)
    rep = {}
    for q in members:
        rep.setdefault(block[q], q)
    # breadth-first block numbering from the start's block
    number = {block[start]: 0}
    border = [block[start]]
    pos = 0
    while pos < len(border):
        b = border[pos]
        pos += 1
        q = rep[b]
        for x in range(d):
            tb = block[transitions[q][x]]
            if tb not in number:
                number[tb] = len(border)
                border.append(tb)
    canon_out = []
    canon_trans = []
    for b in border:
        q = rep[b]
        canon_out.append(outputs[q])
        canon_trans.append(tuple(number[block[transitions[q][x]]] for x in range(d)))
    m = _intern(d, tuple(canon_out), tuple(canon_trans))
    return Aut(m, 0)


class Aut:
    """A tree automorphism presented as a state of a machine."""

    __slots__ = ("machine", "state")

    def __init__(self, machine: Machine, state: int):
        self.machine = machine
        self.state = state

    def canonical(self) -> "Aut":
        """Equivalent state of the minimised, interned closure machine."""
        m = self.machine
        if m.canonical and self.state == 0:
            return self
        cached = m._memo.get(("canon", self.state))
        if cached is None:
            cached = _canonical_from_tables(
                m.alphabet_size, m.outputs, m.transitions, self.state)
            m._memo[("canon", self.state)] = cached
        return cached

    def apply_word(self, w) -> Word:
        w = check_word(as_word(w), self.machine.alphabet_size)
        out = self.machine.outputs
        trans = self.machine.transitions
        q = self.state
        res = []
        for x in w:
            res.append(out[q][x])
            q = trans[q][x]
        return tuple(res)

    def restrict(self, w) -> "Aut":
        """The automorphism acting below the input word w."""
        w = check_word(as_word(w), self.machine.alphabet_size)
        q = self.state
        trans = self.machine.transitions
        for x in w:
            q = trans[q][x]
        return Aut(self.machine, q)

    def compose(self, other: "Aut") -> "Aut":
        """Automorphism w -> self(other(w)), minimised and interned."""
        if self.machine.alphabet_size != other.machine.alphabet_size:
            raise DomainError("cannot compose states over different alphabets")
        d = self.machine.alphabet_size
        out1, tr1 = self.machine.outputs, self.machine.transitions
        out2, tr2 = other.machine.outputs, other.machine.transitions

        def out_fn(pair):
            a, b = pair
            return tuple(out1[a][out2[b][x]] for x in range(d))

        def trans_fn(pair, x):
            a, b = pair
            return (tr1[a][out2[b][x]], tr2[b][x])

        outs, trans = _explore(d, (self.state, other.state), out_fn, trans_fn, None)
        return _canonical_from_tables(d, outs, trans, 0)

    def inverse(self) -> "Aut":
        d = self.machine.alphabet_size
        out, tr = self.machine.outputs, self.machine.transitions
        inv = {}

        def inv_perm(q):
            p = inv.get(q)
            if p is None:
                p = [0] * d
                for x in range(d):
                    p[out[q][x]] = x
                p = tuple(p)
                inv[q] = p
            return p

        def out_fn(q):
            return inv_perm(q)

        def trans_fn(q, x):
            return tr[q][inv_perm(q)[x]]

        outs, trans = _explore(d, self.state, out_fn, trans_fn, None)
        return _canonical_from_tables(d, outs, trans, 0)

    def is_identity(self) -> bool:
        c = self.canonical()
        return c.machine.size == 1 and c.machine.identity == 0

    def state_closure(self) -> list["Aut"]:
        """All restrictions of this automorphism, as distinct automorphisms."""
        m = self.machine
        seen = {self.state}
        order = [self.state]
        pos = 0
        while pos < len(order):
            q = order[pos]
            pos += 1
            for x in range(m.alphabet_size):
                t = m.transitions[q][x]
                if t not in seen:
                    seen.add(t)
                    order.append(t)
        result = []
        canon_seen = set()
        for q in order:
            a = Aut(m, q)
            c = a.canonical()
            if c not in canon_seen:
                canon_seen.add(c)
                result.append(a)
        return result

    def __mul__(self, other):
        if not isinstance(other, Aut):
            return NotImplemented
        return self.compose(other)

    def __pow__(self, n: int) -> "Aut":
        if n == 0:
            return identity_aut(self.machine.alphabet_size)
        base = self if n > 0 else self.inverse()
        n = abs(n)
        acc = None
        while n:
            if n & 1:
                acc = base if acc is None else acc.compose(base)
            n >>= 1
            if n:
                base = base.compose(base)
        return acc

    def __eq__(self, other):
        if not isinstance(other, Aut):
            return NotImplemented
        return self.canonical().machine is other.canonical().machine

    def __hash__(self):
        return self.canonical().machine.table_hash

    def __repr__(self):
        m = self.machine
        label = m.name_of(self.state) if m.names is not None else f"q{self.state}"
        return f"<Aut {label} of {m!r}>"


def equal(g: Aut, h: Aut) -> bool:
    return g == h


_identity_cache: dict[int, Aut] = {}


def identity_aut(alphabet_size: int) -> Aut:
    a = _identity_cache.get(alphabet_size)
    if a is None:
        letters = tuple(range(alphabet_size))
        m = _intern(alphabet_size, (letters,), (tuple(0 for _ in letters),))
        a = Aut(m, 0)
        _identity_cache[alphabet_size] = a
    return a


def minimize(machine: Machine) -> tuple[Machine, list[int]]:
    """Quotient by automorphism equality.

    Returns the quotient machine plus the old-state -> new-state mapping.
    Classes are ordered by their least original index and keep the name of
    that representative.
    """
    d = machine.alphabet_size
    members = list(range(machine.size))
    block = _refine(d, machine.outputs, machine.transitions, members)
    first = {}
    for q in members:
        first.setdefault(block[q], q)
    order = sorted(first, key=lambda b: first[b])
    number = {b: i for i, b in enumerate(order)}
    outputs = []
    transitions = []
    names = []
    identity = None
    letters = tuple(range(d))
    for b in order:
        q = first[b]
        outputs.append(machine.outputs[q])
        row = tuple(number[block[machine.transitions[q][x]]] for x in range(d))
        transitions.append(row)
        names.append(machine.name_of(q))
    for i, row in enumerate(transitions):
        if outputs[i] == letters and all(t == i for t in row):
            identity = i
            break
    mapping = [number[block[q]] for q in members]
    out = Machine(d, outputs, transitions, identity=identity,
                  names=tuple(names) if machine.names is not None else None)
    return out, mapping


def distinguishing_depth(machine: Machine) -> int:
    """Least p with: every state that is not the identity moves some word
    of length at most p.

    Computed on the minimised machine, where the bound p <= number of
    states holds; a machine whose states are all trivial yields 1.
    """
    m, _ = minimize(machine)
    d = m.alphabet_size
    letters = tuple(range(d))
    INF = float("inf")
    depth = [1 if m.outputs[q] != letters else INF for q in range(m.size)]
    if m.identity is not None:
        depth[m.identity] = INF  # the identity moves nothing
    changed = True
    while changed:
        changed = False
        for q in range(m.size):
            if q == m.identity or depth[q] == 1:
                continue
            best = min(depth[m.transitions[q][x]] for x in range(d)) + 1
            if best < depth[q]:
                depth[q] = best
                changed = True
    finite = [depth[q] for q in range(m.size) if q != m.identity]
    if not finite:
        return 1
    assert all(v != INF for v in finite), "non-identity state in minimised machine"
    return int(max(finite))


# ---------------------------------------------------------------------------
# machine text format

_STATE_RE = re.compile(r"^state\s+(\S+)\s+perm\s+(.*?)\s+to\s+(.*)$")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def parse_machine(text: str) -> Machine:
    """Parse the plain-text machine format.

    One `alphabet <d>` directive, then one `state <name> perm <d images>
    to <d successor names>` line per state.  `#` starts a comment.  The
    name `e` is reserved for the identity; if absent, an identity state
    is synthesised.
    """
    d = None
    rows = []  # (lineno, name, perm, successor names)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet"):
            if d is not None:
                raise MachineParseError(f"line {lineno}: duplicate alphabet directive")
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise MachineParseError(f"line {lineno}: expected 'alphabet <d>'")
            d = int(parts[1])
            if d < 2:
                raise MachineParseError(f"line {lineno}: alphabet must have >= 2 letters")
            continue
        m = _STATE_RE.match(line)
        if not m:
            raise MachineParseError(f"line {lineno}: unrecognised directive {line!r}")
        if d is None:
            raise MachineParseError(f"line {lineno}: state before alphabet directive")
        name, perm_text, to_text = m.group(1), m.group(2), m.group(3)
        if not _NAME_RE.match(name):
            raise MachineParseError(f"line {lineno}: bad state name {name!r}")
        perm_parts = perm_text.split()
        to_parts = to_text.split()
        if len(perm_parts) != d or len(to_parts) != d:
            raise MachineParseError(
                f"line {lineno}: state {name} needs {d} images and {d} successors")
        try:
            perm = tuple(int(p) for p in perm_parts)
        except ValueError:
            raise MachineParseError(f"line {lineno}: non-integer image") from None
        if tuple(sorted(perm)) != tuple(range(d)):
            raise MachineParseError(
                f"line {lineno}: output row of {name} is not a permutation")
        rows.append((lineno, name, perm, to_parts))
    if d is None:
        raise MachineParseError("missing alphabet directive")
    if not rows:
        raise MachineParseError("machine has no states")
    names = [r[1] for r in rows]
    if len(set(names)) != len(names):
        raise MachineParseError("duplicate state name")
    if "e" not in names:
        rows.append((0, "e", tuple(range(d)), ["e"] * d))
        names.append("e")
    index = {n: i for i, n in enumerate(names)}
    outputs = []
    transitions = []
    for lineno, name, perm, to_parts in rows:
        outputs.append(perm)
        row = []
        for t in to_parts:
            if t not in index:
                raise MachineParseError(f"line {lineno}: unknown successor state {t!r}")
            row.append(index[t])
        transitions.append(tuple(row))
    e = index["e"]
    if outputs[e] != tuple(range(d)) or any(t != e for t in transitions[e]):
        raise MachineParseError("state 'e' is reserved for the identity")
    return Machine(d, outputs, transitions, identity=e, names=tuple(names))


def format_machine(machine: Machine) -> str:
    lines = [f"alphabet {machine.alphabet_size}"]
    for q in range(machine.size):
        perm = " ".join(str(x) for x in machine.outputs[q])
        to = " ".join(machine.name_of(t) for t in machine.transitions[q])
        lines.append(f"state {machine.name_of(q)} perm {perm} to {to}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# state expressions: products of named states with inverses and restrictions
#
#   expr   := factor ('*' factor)*
#   factor := atom suffix*
#   atom   := NAME | '(' expr ')'
#   suffix := '^-1' | '|' WORD
#
# Suffixes apply left to right, so a^-1|01 restricts the inverse of a to
# the subtree below the input word 01.

def parse_state_expr(machine: Machine, text: str) -> Aut:
    pos = 0
    s = text.strip()

    def fail(msg):
        raise ParseError(f"state expression {text!r}: {msg}")

    def skip_ws():
        nonlocal pos
        while pos < len(s) and s[pos].isspace():
            pos += 1

    def parse_atom() -> Aut:
        nonlocal pos
        skip_ws()
        if pos >= len(s):
            fail("unexpected end")
        if s[pos] == "(":
            pos += 1
            a = parse_expr()
            skip_ws()
            if pos >= len(s) or s[pos] != ")":
                fail("missing ')'")
            pos += 1
            return a
        m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", s[pos:])
        if not m:
            fail(f"expected state name at column {pos + 1}")
        pos += m.end()
        return machine.state(m.group(0))

    def parse_factor() -> Aut:
        nonlocal pos
        a = parse_atom()
        while True:
            skip_ws()
            if s.startswith("^-1", pos):
                pos += 3
                a = a.inverse()
            elif pos < len(s) and s[pos] == "|":
                pos += 1
                m = re.match(r"[0-9]+", s[pos:])
                if not m:
                    fail("expected word after '|'")
                pos += m.end()
                try:
                    a = a.restrict(check_word(as_word(m.group(0)),
                                              machine.alphabet_size))
                except ValueError as exc:
                    fail(str(exc))
            else:
                return a

    def parse_expr() -> Aut:
        nonlocal pos
        a = parse_factor()
        while True:
            skip_ws()
            if pos < len(s) and s[pos] == "*":
                pos += 1
                a = a.compose(parse_factor())
            else:
                return a

    result = parse_expr()
    skip_ws()
    if pos != len(s):
        fail(f"trailing input at column {pos + 1}")
    return result


def _needs_parens(label: str) -> bool:
    depth = 0
    for c in label:
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif c == "*" and depth == 0:
            return True
    return False


def _wrap(label: str) -> str:
    return f"({label})" if _needs_parens(label) else label


def compose_labels(l1, l2):
    if l1 is None or l2 is None:
        return None
    return f"{l1}*{l2}"


def invert_label(label):
    if label is None:
        return None
    return f"{_wrap(label)}^-1"


def restrict_label(label, w: Word):
    if label is None:
        return None
    if not w:
        return label
    return f"{_wrap(label)}|{word_text(w)}"
