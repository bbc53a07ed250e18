"""Command-line interface.

Every subcommand reads a machine (a file path or a bundled name), runs
one analysis and writes a deterministic report as an aligned table, CSV
or JSON.  Exit codes: 0 success, 2 parse error, 3 cap exceeded,
4 domain error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources

from .convalg import (AlgebraElement, Scalar, format_element, format_scalar,
                      get_pattern_cap, parse_element, parse_shift,
                      set_pattern_cap, unit_element)
from .errors import CapExceededError, DomainError, ParseError
from .fixedpoints import (boundary_null_certificate, fixed_counts,
                          fixed_counts_csv, hausdorff_witness, is_dangerous,
                          mu_fix_exact)
from .germs import essential_freeness_report
from .mealy import get_state_cap, parse_machine, parse_state_expr, set_state_cap
from .points import format_point, parse_point
from .traces import canonical_trace, isotropy_trace, rep_matrix

BUNDLED = ("grigorchuk", "adding", "lamplighter")


def _load_machine(spec: str):
    """Return (machine, display name) from a path or a bundled name."""
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            text = fh.read()
        return parse_machine(text), os.path.basename(spec)
    name = spec[:-3] if spec.endswith(".gt") else spec
    if name in BUNDLED:
        text = resources.files("germtrace.data").joinpath(f"{name}.gt").read_text()
        return parse_machine(text), f"{name}.gt"
    raise ParseError(f"machine {spec!r}: no such file or bundled machine "
                     f"(bundled: {', '.join(BUNDLED)})")


def _read_element(machine, spec: str) -> AlgebraElement:
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            spec = fh.read()
    return parse_element(machine, spec)


def _frac_json(f: Fraction) -> dict:
    return {"num": f.numerator, "den": f.denominator}


def _scalar_json(s: Scalar) -> dict:
    return {"re": _frac_json(s.re), "im": _frac_json(s.im)}


def _frac_text(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _scalar_float_text(s: Scalar) -> str:
    if s.is_real():
        return repr(float(s.re))
    sign = "+" if s.im >= 0 else "-"
    return f"{float(s.re)!r}{sign}{abs(float(s.im))!r}i"


def _table(rows: list[list[str]], indent: str = "  ") -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return [indent + "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
            for r in rows]


def _element_json(elem: AlgebraElement) -> list[dict]:
    text = format_element(elem)
    out = []
    for line in text.splitlines():
        coeff, shift = line.split(None, 1)
        out.append({"coeff": coeff, "shift": shift})
    return out


def _machine_header(name: str, machine) -> str:
    return (f"machine: {name} ({machine.size} states, "
            f"alphabet {machine.alphabet_size})")


def _json_dump(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def _cmd_fixmeasure(args) -> str:
    machine, name = _load_machine(args.machine)
    state = parse_state_expr(machine, args.state)
    counts = fixed_counts(state, args.depth)
    mu = mu_fix_exact(state)
    cert = boundary_null_certificate(state)
    d = machine.alphabet_size
    bracket = all(
        Fraction(counts.interior[k], d ** k) <= mu <= Fraction(counts.fixed[k], d ** k)
        for k in range(counts.depth + 1))
    if args.format == "csv":
        return fixed_counts_csv(counts)
    if args.format == "json":
        return _json_dump({
            "machine": name,
            "alphabet": d,
            "state": args.state,
            "counts": {
                "k": list(range(counts.depth + 1)),
                "f": list(counts.fixed),
                "i": list(counts.interior),
                "P": list(counts.live),
            },
            "mu_fix": _frac_json(mu),
            "mu_fix_float": float(mu),
            "bracket_holds": bracket,
            "certificate": {
                "depth": cert.depth,
                "checks": [list(c) for c in cert.checks],
                "holds": cert.holds,
            },
        })
    lines = [_machine_header(name, machine), f"state: {args.state}", ""]
    rows = [["k", "f_k", "i_k", "P_k", "P_k/d^k"]]
    for k in range(counts.depth + 1):
        frac = Fraction(counts.live[k], d ** k)
        rows.append([str(k), str(counts.fixed[k]), str(counts.interior[k]),
                     str(counts.live[k]), f"{_frac_text(frac)} ({float(frac)!r})"])
    lines.extend(_table(rows))
    lines.append("")
    lines.append(f"mu_fix = {_frac_text(mu)} ({float(mu)!r}), "
                 "both as mu(Fix) and mu(int Fix)")
    lines.append(f"bracket i_k/d^k <= mu <= f_k/d^k at all computed k: "
                 f"{'yes' if bracket else 'NO'}")
    lines.append(f"decay certificate: depth p = {cert.depth}; "
                 f"P_(pk) <= (d^p-1)^k for k = 1..{len(cert.checks)}: "
                 f"{'PASS' if cert.holds else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _cmd_essfree(args) -> str:
    machine, name = _load_machine(args.machine)
    report = essential_freeness_report(machine)
    if args.format == "csv":
        lines = ["state,mu_num,mu_den,mu_float,cert_depth,cert_checks,cert_holds"]
        for (state, mu), cert in zip(report.rows, report.certificates):
            lines.append(f"{state},{mu.numerator},{mu.denominator},{float(mu)!r},"
                         f"{cert.depth},{len(cert.checks)},{cert.holds}")
        return "\n".join(lines) + "\n"
    if args.format == "json":
        return _json_dump({
            "machine": name,
            "rows": [{"state": state, "mu_fix": _frac_json(mu),
                      "mu_fix_float": float(mu),
                      "certificate": {"depth": cert.depth,
                                      "checks": [list(c) for c in cert.checks],
                                      "holds": cert.holds}}
                     for (state, mu), cert in zip(report.rows, report.certificates)],
            "essentially_free": report.essentially_free,
            "topologically_free": report.topologically_free,
        })
    lines = [_machine_header(name, machine), ""]
    rows = [["state", "mu_fix", "float", "boundary-null certificate"]]
    for (state, mu), cert in zip(report.rows, report.certificates):
        rows.append([state, _frac_text(mu), repr(float(mu)),
                     f"{'PASS' if cert.holds else 'FAIL'} "
                     f"(p = {cert.depth}, {len(cert.checks)} checks)"])
    lines.extend(_table(rows))
    lines.append("")
    lines.append(f"essentially free: {'yes' if report.essentially_free else 'no'}")
    lines.append(f"topologically free: {'yes' if report.topologically_free else 'no'}")
    return "\n".join(lines) + "\n"


def _cmd_hausdorff(args) -> str:
    machine, name = _load_machine(args.machine)
    witness = hausdorff_witness(machine)
    if args.format == "json":
        payload = {"machine": name, "hausdorff": witness is None}
        payload["witness"] = None if witness is None else {
            "state": witness[0].machine.name_of(witness[0].state),
            "point": format_point(witness[1]),
        }
        return _json_dump(payload)
    if args.format == "csv":
        if witness is None:
            return "hausdorff,witness_state,witness_point\nyes,,\n"
        state, point = witness
        return ("hausdorff,witness_state,witness_point\n"
                f"no,{state.machine.name_of(state.state)},{format_point(point)}\n")
    lines = [_machine_header(name, machine)]
    if witness is None:
        lines.append("hausdorff: yes (no state admits a boundary fixed point "
                     "with interiorizable restrictions)")
    else:
        state, point = witness
        lines.append("hausdorff: no")
        lines.append(f"witness state: {state.machine.name_of(state.state)}")
        lines.append(f"witness point: {format_point(point)}")
    return "\n".join(lines) + "\n"


def _cmd_dangerous(args) -> str:
    machine, name = _load_machine(args.machine)
    point = parse_point(args.point, machine.alphabet_size)
    verdict = is_dangerous(machine, point)
    if args.format == "json":
        return _json_dump({"machine": name, "point": format_point(point),
                           "dangerous": verdict})
    if args.format == "csv":
        return f"point,dangerous\n{format_point(point)},{'yes' if verdict else 'no'}\n"
    return (f"{_machine_header(name, machine)}\n"
            f"point: {format_point(point)}\n"
            f"dangerous: {'yes' if verdict else 'no'}\n")


def _cmd_trace(args) -> str:
    machine, name = _load_machine(args.machine)
    elem = _read_element(machine, args.element)
    tau = canonical_trace(elem)
    phi = isotropy_trace(elem)
    diff = tau - phi
    if args.format == "json":
        return _json_dump({
            "machine": name,
            "element": _element_json(elem),
            "canonical_trace": _scalar_json(tau),
            "isotropy_trace": _scalar_json(phi),
            "difference": _scalar_json(diff),
        })
    if args.format == "csv":
        return ("functional,value,float\n"
                f"canonical_trace,{format_scalar(tau)},{_scalar_float_text(tau)}\n"
                f"isotropy_trace,{format_scalar(phi)},{_scalar_float_text(phi)}\n"
                f"difference,{format_scalar(diff)},{_scalar_float_text(diff)}\n")
    lines = [_machine_header(name, machine), "element:"]
    lines.extend("  " + ln for ln in (format_element(elem).splitlines() or ["0"]))
    lines.append(f"canonical trace = {format_scalar(tau)} ({_scalar_float_text(tau)})")
    lines.append(f"isotropy trace  = {format_scalar(phi)} ({_scalar_float_text(phi)})")
    lines.append(f"difference      = {format_scalar(diff)} ({_scalar_float_text(diff)})")
    return "\n".join(lines) + "\n"


def _cmd_alg(args) -> str:
    machine, name = _load_machine(args.machine)
    op = args.op
    if op in ("mult", "add"):
        if args.element1 is None or args.element2 is None:
            raise DomainError(f"alg {op} needs -e1 and -e2")
        e1 = _read_element(machine, args.element1)
        e2 = _read_element(machine, args.element2)
        result = e1 * e2 if op == "mult" else e1 + e2
        return _emit_element(args, name, machine, result)
    if args.element is None:
        raise DomainError(f"alg {op} needs -e")
    elem = _read_element(machine, args.element)
    if op == "adjoint":
        return _emit_element(args, name, machine, elem.adjoint())
    verdict = elem.is_zero() if op == "iszero" else elem.is_singular()
    key = "is_zero" if op == "iszero" else "is_singular"
    if args.format == "json":
        return _json_dump({"machine": name, "element": _element_json(elem),
                           key: verdict})
    if args.format == "csv":
        return f"{key}\n{'yes' if verdict else 'no'}\n"
    return (f"{_machine_header(name, machine)}\n"
            f"{key}: {'yes' if verdict else 'no'}\n")


def _emit_element(args, name: str, machine, elem: AlgebraElement) -> str:
    text = format_element(elem)
    if args.format == "json":
        return _json_dump({"machine": name, "result": _element_json(elem)})
    if args.format == "csv":
        return text + "\n" if text else "# zero element\n"
    lines = [_machine_header(name, machine), "result:"]
    lines.extend("  " + ln for ln in (text.splitlines() or ["0"]))
    return "\n".join(lines) + "\n"


def _cmd_rep(args) -> str:
    machine, name = _load_machine(args.machine)
    elem = _read_element(machine, args.element)
    x = parse_point(args.point, machine.alphabet_size)
    basis = [parse_shift(machine, part).germ_at(x)
             for part in args.basis.split(";") if part.strip()]
    iso = [parse_shift(machine, part).germ_at(x)
           for part in (args.iso.split(";") if args.iso else []) if part.strip()]
    mat = rep_matrix(elem, x, basis, iso)
    if args.format == "json":
        return _json_dump({
            "machine": name,
            "point": format_point(x),
            "labels": list(mat.labels),
            "entries": [[_scalar_json(s) for s in row] for row in mat.entries],
            "closed": mat.closed,
        })
    if args.format == "csv":
        lines = ["label," + ",".join(mat.labels)]
        for label, row in zip(mat.labels, mat.entries):
            lines.append(label + "," + ",".join(format_scalar(s) for s in row))
        lines.append(f"closed,{'yes' if mat.closed else 'no'}")
        return "\n".join(lines) + "\n"
    lines = [_machine_header(name, machine), f"point: {format_point(x)}"]
    rows = [[""] + list(mat.labels)]
    for label, row in zip(mat.labels, mat.entries):
        rows.append([label] + [format_scalar(s) for s in row])
    lines.extend(_table(rows))
    lines.append(f"closed: {'yes' if mat.closed else 'no'}")
    return "\n".join(lines) + "\n"


def _cmd_wordproblem(args) -> str:
    machine, name = _load_machine(args.machine)
    aut = parse_state_expr(machine, args.state)
    verdict = aut.is_identity()
    if args.format == "json":
        return _json_dump({"machine": name, "expression": args.state,
                           "identity": verdict})
    if args.format == "csv":
        return f"expression,identity\n{args.state},{'yes' if verdict else 'no'}\n"
    return (f"{_machine_header(name, machine)}\n"
            f"expression: {args.state}\n"
            f"identity: {'yes' if verdict else 'no'}\n")


# ---------------------------------------------------------------------------
# wiring

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="germtrace",
        description="Exact fixed-point measures, germs and traces for "
                    "finite-state tree automorphisms.")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, machine=True):
        if machine:
            p.add_argument("-m", "--machine", required=True,
                           help="machine file or bundled name "
                                "(grigorchuk, adding, lamplighter)")
        p.add_argument("--format", choices=("table", "csv", "json"),
                       default="table")
        p.add_argument("-o", "--output", help="write the report to a file")
        p.add_argument("--cap-states", type=int, default=None,
                       help="limit on explored product-machine states")
        p.add_argument("--cap-patterns", type=int, default=None,
                       help="limit on explored coincidence-pattern states")

    p = sub.add_parser("fixmeasure", help="fixed-word counts and exact measure")
    p.add_argument("-s", "--state", required=True)
    p.add_argument("-K", "--depth", type=int, default=10)
    common(p)
    p.set_defaults(run=_cmd_fixmeasure)

    p = sub.add_parser("essfree", help="essential freeness report")
    common(p)
    p.set_defaults(run=_cmd_essfree)

    p = sub.add_parser("hausdorff", help="Hausdorffness of the germ groupoid")
    common(p)
    p.set_defaults(run=_cmd_hausdorff)

    p = sub.add_parser("dangerous", help="is the unit at a point a limit of non-units")
    p.add_argument("-x", "--point", required=True)
    common(p)
    p.set_defaults(run=_cmd_dangerous)

    p = sub.add_parser("trace", help="canonical and isotropy traces of an element")
    p.add_argument("-e", "--element", required=True,
                   help="element text or file (one '<scalar> <state>:<u>><v>' per line)")
    common(p)
    p.set_defaults(run=_cmd_trace)

    p = sub.add_parser("alg", help="algebra operations on elements")
    p.add_argument("op", choices=("mult", "add", "adjoint", "iszero", "issingular"))
    p.add_argument("-e", "--element", help="element for unary ops")
    p.add_argument("-e1", "--element1", help="left element for binary ops")
    p.add_argument("-e2", "--element2", help="right element for binary ops")
    common(p)
    p.set_defaults(run=_cmd_alg)

    p = sub.add_parser("rep", help="truncated representation matrix")
    p.add_argument("-e", "--element", required=True)
    p.add_argument("-x", "--point", required=True)
    p.add_argument("--basis", required=True,
                   help="semicolon-separated shifts, e.g. 'e:>;b:>;c:>;d:>'")
    p.add_argument("--iso", default="",
                   help="semicolon-separated isotropy shifts forming a finite subgroup")
    common(p)
    p.set_defaults(run=_cmd_rep)

    p = sub.add_parser("wordproblem", help="decide whether a state expression is trivial")
    p.add_argument("-s", "--state", required=True,
                   help="expression over state names with *, ^-1, |word")
    common(p)
    p.set_defaults(run=_cmd_wordproblem)
    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    old_state_cap, old_pattern_cap = get_state_cap(), get_pattern_cap()
    if args.cap_states is not None:
        set_state_cap(args.cap_states)
    if args.cap_patterns is not None:
        set_pattern_cap(args.cap_patterns)
    try:
        report = args.run(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    finally:
        set_state_cap(old_state_cap)
        set_pattern_cap(old_pattern_cap)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    return 0


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
