"""Command-line entry point: one subcommand per stage plus verify-all."""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from typing import Sequence

import sympy as sp

from . import detsys, invclass, liealg, optsys, report
from . import symexpr as S
from .formatting import field_to_dict, field_to_latex, field_to_string, to_latex, to_string
from .jetcalc import VectorField

NAMES = liealg.NAMES
COMMANDS = ("symmetries", "equivalence-algebra", "commutator-table", "adjoint-table", "killing-form",
            "flows", "optimal-system", "normalize", "invariants", "classify", "verify-all")


_RATIONAL = re.compile(r"[+-]?\d+(/[1-9]\d*)?")


def _exact(text: str) -> Fraction:
    text = text.strip()
    if not _RATIONAL.fullmatch(text):
        raise ValueError(text)
    return Fraction(text)


class UsageError(Exception):
    """Bad flag value; reported with the flag name and exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- helpers

def _rational(flag: str, text: str) -> sp.Rational:
    try:
        q = _exact(text)
    except ValueError:
        raise UsageError(f"argument {flag}: expected an exact rational p/q, got {text!r}") from None
    return sp.Rational(q.numerator, q.denominator)


def _params(args) -> dict:
    out = {}
    if getattr(args, "alpha", None) is not None:
        q = _rational("--alpha", args.alpha)
        out.update({f"alpha{i}": q for i in range(1, 9)})
    if getattr(args, "beta", None) is not None:
        q = _rational("--beta", args.beta)
        out.update({f"beta{i}": q for i in range(1, 5)})
    return out


def _basis_json(fields: Sequence[VectorField], names: Sequence[str] | None = None) -> list[dict]:
    names = names or [f"Y{i + 1}" for i in range(len(fields))]
    return [{"name": n, "coefficients": field_to_dict(F)} for n, F in zip(names, fields)]


def _vec(v) -> str:
    return report._vec_string(v)


def _latex_vec(v) -> str:
    parts = []
    for c, n in zip(v, NAMES):
        c = sp.sympify(c)
        if c == 0:
            continue
        txt = to_latex(c)
        sym = f"Y_{{{n[1:]}}}"
        term = sym if txt == "1" else f"-{sym}" if txt == "-1" else \
            rf"\left({txt}\right){sym}" if c.is_Add else f"{txt}{sym}"
        parts.append(term)
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += p if p.startswith("-") else "+" + p
    return out


def _deriv_name(e: sp.Expr) -> str:
    """Render unknown functions as xi, tau_x, phi_uu, ... in determining equations."""
    def rename(z):
        if isinstance(z, sp.Derivative):
            base = z.expr.func.__name__
            suffix = "".join(str(v) * k for v, k in z.variable_count)
            return sp.Symbol(f"{base}_{''.join(sorted(suffix, key='txu'.index))}")
        return sp.Symbol(z.func.__name__)
    e = e.replace(lambda z: isinstance(z, sp.Derivative), rename)
    e = e.replace(lambda z: isinstance(z, sp.core.function.AppliedUndef) and z.func in
                  (detsys.XI, detsys.TAU, detsys.PHI), rename)
    return str(sp.expand(e)).replace("**", "^")


def _table_latex(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    cols = "l" * len(header)
    lines = [rf"\begin{{tabular}}{{{cols}}}", " & ".join(header) + r" \\ \hline"]
    lines += [" & ".join(r) + r" \\" for r in rows]
    lines.append(r"\end{tabular}")
    return "\n".join(lines)


def _table_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    return "\n".join([fmt.format(*header), fmt.format(*("-" * w for w in widths))] +
                     [fmt.format(*r) for r in rows])


def _envelope(stage: str, basis: list[dict], tables: dict, rep: report.Report | None) -> dict:
    return {"stage": stage, "basis": basis, "tables": tables,
            "deviations": [d.to_json() for d in rep.deviations] if rep else []}


def _stage(stage: str, strict: bool = False) -> report.Report:
    return report.stage_report(stage, strict)


# ---------------------------------------------------------------- commands

def cmd_symmetries(args):
    system = detsys.determining_system("point")
    sol = detsys.solve_polynomial_ansatz(system, args.degree)
    names = [f"X{i + 1}" for i in range(len(sol.basis))]
    rep = _stage("symmetries", args.strict)
    eqs = [_deriv_name(e) for e in system.equations]
    if args.format == "json":
        return _envelope("symmetries", _basis_json(sol.basis, names),
                         {"determining_system": eqs, "degree": args.degree}, rep), rep.exit_status()
    if args.format == "latex":
        rows = [[n, f"${field_to_latex(F)}$"] for n, F in zip(names, sol.basis)]
        return _table_latex(["", "generator"], rows), rep.exit_status()
    lines = [f"point symmetries (polynomial degree <= {args.degree}):"]
    lines += [f"  {n} = {field_to_string(F)}" for n, F in zip(names, sol.basis)]
    lines.append("determining system:")
    lines += [f"  {e} = 0" for e in eqs]
    return "\n".join(lines), rep.exit_status()


def cmd_equivalence_algebra(args):
    sol = detsys.solve_polynomial_ansatz(detsys.determining_system("equivalence"), args.degree)
    canon = liealg.canonical_basis()
    rows = []
    for F in sol.basis:
        try:
            rows.append(_vec(liealg.coordinates_in(canon, F)))
        except liealg.NotClosed:
            rows.append("outside span{Y1..Y6}")
    rep = _stage("equivalence-algebra", args.strict)
    verdicts = [str(detsys.verify_generator(Y, "equivalence")) for Y in canon]
    if args.format == "json":
        return _envelope("equivalence-algebra", _basis_json(canon),
                         {"ansatz_dimension": len(sol.basis), "ansatz_basis": _basis_json(sol.basis),
                          "ansatz_in_canonical_basis": rows, "verify": verdicts}, rep), rep.exit_status()
    if args.format == "latex":
        return _table_latex(["", "generator"], [[f"$Y_{{{i + 1}}}$", f"${field_to_latex(Y)}$"]
                                                 for i, Y in enumerate(canon)]), rep.exit_status()
    lines = [f"equivalence algebra: dimension {len(sol.basis)} (polynomial degree <= {args.degree})"]
    lines += [f"  Y{i + 1} = {field_to_string(Y)}   [{v}]" for i, (Y, v) in enumerate(zip(canon, verdicts))]
    return "\n".join(lines), rep.exit_status()


def _bracket_table():
    alg = liealg.canonical_algebra()
    return [[alg.structure[i][j] for j in range(6)] for i in range(6)]


def cmd_commutator_table(args):
    T = _bracket_table()
    rep = _stage("commutator-table", args.strict)
    if args.format == "json":
        tab = {NAMES[i]: {NAMES[j]: _vec(T[i][j]) for j in range(6)} for i in range(6)}
        return _envelope("commutator-table", _basis_json(liealg.canonical_basis()),
                         {"commutators": tab}, rep), rep.exit_status()
    if args.format == "latex":
        rows = [[f"$Y_{{{i + 1}}}$"] + [f"${_latex_vec(T[i][j])}$" for j in range(6)] for i in range(6)]
        return _table_latex(["$[\\cdot,\\cdot]$"] + [f"$Y_{{{j + 1}}}$" for j in range(6)], rows), \
            rep.exit_status()
    rows = [[NAMES[i]] + [_vec(T[i][j]) for j in range(6)] for i in range(6)]
    return _table_text(["[,]"] + list(NAMES), rows), rep.exit_status()


def cmd_adjoint_table(args):
    rep = _stage("adjoint-table", args.strict)
    T = [[[e.to_sympy() for e in liealg.adjoint_action(i, j)] for j in range(6)] for i in range(6)]
    if args.format == "json":
        tab = {NAMES[i]: {NAMES[j]: _vec(T[i][j]) for j in range(6)} for i in range(6)}
        return _envelope("adjoint-table", _basis_json(liealg.canonical_basis()),
                         {"adjoint": tab, "parameter": "s"}, rep), rep.exit_status()
    if args.format == "latex":
        rows = [[f"$Y_{{{i + 1}}}$"] + [f"${_latex_vec(T[i][j])}$" for j in range(6)] for i in range(6)]
        return _table_latex(["Ad"] + [f"$Y_{{{j + 1}}}$" for j in range(6)], rows), rep.exit_status()
    rows = [[NAMES[i]] + [_vec(T[i][j]) for j in range(6)] for i in range(6)]
    return _table_text(["Ad(exp(s Yi)) Yj"] + list(NAMES), rows), rep.exit_status()


def cmd_killing_form(args):
    rep = _stage("killing-form", args.strict)
    K = liealg.killing_matrix()
    series = liealg.derived_series()
    a = sp.symbols("a1:7")
    b = sp.symbols("b1:7")
    closed = sp.expand(sum(K[i][j] * a[i] * b[j] for i in range(6) for j in range(6)))
    if args.format == "json":
        return _envelope("killing-form", _basis_json(liealg.canonical_basis()), {
            "matrix": [[str(v) for v in row] for row in K],
            "closed_form": str(closed).replace("**", "^"),
            "derived_series": [[_vec(v) for v in level] for level in series],
        }, rep), rep.exit_status()
    if args.format == "latex":
        rows = [[f"$Y_{{{i + 1}}}$"] + [str(v) for v in K[i]] for i in range(6)]
        return _table_latex(["$K$"] + [f"$Y_{{{j + 1}}}$" for j in range(6)], rows) + \
            f"\n% K(a, b) = {sp.latex(closed)}", rep.exit_status()
    lines = [_table_text(["K"] + list(NAMES), [[NAMES[i]] + [str(v) for v in K[i]] for i in range(6)]),
             f"K(a, b) = {closed}", "derived series:"]
    for k, level in enumerate(series, 1):
        lines.append(f"  L({k}) = span{{{', '.join(_vec(v) for v in level)}}}" if level else f"  L({k}) = 0")
    return "\n".join(lines), rep.exit_status()


def cmd_flows(args):
    rep = _stage("flows", args.strict)
    flows = [liealg.flow(i) for i in range(6)]
    rules = [liealg.transform_solution(i) for i in range(6)]
    coords = [str(c) for c in liealg.EQUIV_COORDS]
    if args.format == "json":
        return _envelope("flows", _basis_json(liealg.canonical_basis()), {
            "flows": {NAMES[i]: {str(c): to_string(v) for c, v in F.maps.items()} for i, F in enumerate(flows)},
            "solution_rules": {NAMES[i]: {"solution": to_string(r.solution), "E_bar": to_string(r.E_bar),
                                          "H_bar": to_string(r.H_bar), "verified": liealg.verify_rule(r)}
                               for i, r in enumerate(rules)},
        }, rep), rep.exit_status()
    if args.format == "latex":
        rows = [[f"$G_{{{i + 1}}}$"] + [f"${to_latex(F.maps[c])}$" for c in liealg.EQUIV_COORDS]
                for i, F in enumerate(flows)]
        return _table_latex([""] + [f"${c}$" for c in coords], rows), rep.exit_status()
    rows = [[f"G{i + 1}"] + [to_string(F.maps[c]) for c in liealg.EQUIV_COORDS] for i, F in enumerate(flows)]
    lines = [_table_text(["flow"] + coords, rows), "solutions carried by the inverse flows:"]
    for i, r in enumerate(rules):
        lines.append(f"  {NAMES[i]}: u = {to_string(r.solution)}, E = {to_string(r.E_bar)}, "
                     f"H = {to_string(r.H_bar)}")
    return "\n".join(lines), rep.exit_status()


def cmd_optimal_system(args):
    rep = _stage("optimal-system", args.strict)
    items = []
    for i, r in optsys.REPRESENTATIVES.items():
        for sg in optsys.sign_instances(r):
            items.append((i, sg, r.field(sg), optsys.project(r.field(sg))))
    if args.format == "json":
        return _envelope("optimal-system", _basis_json(liealg.canonical_basis()), {
            "representatives": [{"index": i, "signs": list(sg), "pattern": [str(p) for p in
                                                                              optsys.REPRESENTATIVES[i].pattern],
                                 "field": field_to_dict(F), "projection": field_to_dict(Z),
                                 "z": optsys.Z_OF_A.get(i)} for i, sg, F, Z in items],
        }, rep), rep.exit_status()
    if args.format == "latex":
        rows = [[f"$A^{{{i}}}$", " ".join("+" if v > 0 else "-" for v in sg), f"${field_to_latex(F)}$"]
                for i, sg, F, _ in items]
        return _table_latex(["", "signs", "representative"], rows), rep.exit_status()
    rows = [[f"A{i}", "".join("+" if v > 0 else "-" for v in sg), field_to_string(F),
             f"Z{optsys.Z_OF_A[i]}" if i in optsys.Z_OF_A else "0"] for i, sg, F, _ in items]
    return _table_text(["A", "signs", "field", "projects to"], rows), rep.exit_status()


def _parse_vector(text: str) -> list[Fraction]:
    parts = text.split(",")
    if len(parts) != 6:
        raise UsageError(f"argument --vector: expected 6 comma-separated rationals, got {len(parts)}")
    try:
        return [_exact(p) for p in parts]
    except ValueError:
        raise UsageError(f"argument --vector: not a list of exact rationals: {text!r}") from None


def cmd_normalize(args):
    if args.vector is None:
        raise UsageError("argument --vector: required")
    v = _parse_vector(args.vector)
    try:
        nf = optsys.normalize(v)
    except ValueError as exc:
        raise UsageError(f"argument --vector: {exc}") from None
    body = {"representative": f"A{nf.index}", "signs": list(nf.signs),
            "params": {k: str(q) for k, q in nf.params.items()}, "word": nf.word.to_json(),
            "vector": [str(q) for q in nf.vector], "branch": nf.branch}
    if args.format == "json":
        return _envelope("normalize", _basis_json(liealg.canonical_basis()), {"normal_form": body}, None), 0
    if args.format == "latex":
        return f"$A^{{{nf.index}}} = {field_to_latex(nf.representative.field(nf.signs, nf.params))}$", 0
    lines = [f"representative: A{nf.index}  ({field_to_string(nf.representative.field(nf.signs, nf.params))})",
             f"branch: {nf.branch}", f"word: {nf.word}",
             "normal form: " + _vec(nf.vector)]
    if nf.params:
        lines.append("parameters: " + ", ".join(f"{k} = {q}" for k, q in nf.params.items()))
    return "\n".join(lines), 0


def cmd_invariants(args):
    params = _params(args)
    zs = [args.z] if args.z else list(range(1, 24))
    out = []
    for z in zs:
        if not 1 <= z <= 23:
            raise UsageError(f"argument --z: must lie in 1..23, got {z}")
        primary = optsys.REPRESENTATIVES[optsys.a_indices_of(z)[0]]
        for sg in optsys.sign_instances(primary):
            Z = invclass.z_field(z, sg, params, args.realization)
            inv = invclass.invariants_of(Z)
            fam = invclass.reconstruct_equation(inv)
            out.append((z, sg, Z, inv, fam))
    rep = _stage("invariants", args.strict) if not params and args.realization == "canonical" else None
    if args.format == "json":
        rows = [{"z": z, "signs": list(sg), "Z": field_to_dict(Z), "shapes": [str(s) for s in inv.shapes],
                 "invariants": [to_string(I) for I in inv.as_list()],
                 "lambda": to_string(inv.lam) if inv.lam is not None else None,
                 "E": to_string(fam.E_form) if fam else None, "H": to_string(fam.H_form) if fam else None,
                 "no_invariant_equation": not fam}
                for z, sg, Z, inv, fam in out]
        return _envelope("invariants", _basis_json(liealg.canonical_basis()), {"invariants": rows}, rep), \
            rep.exit_status() if rep else 0
    if args.format == "latex":
        rows = [[f"$Z^{{{z}}}$", " ".join("+" if v > 0 else "-" for v in sg),
                 ", ".join(f"${to_latex(I)}$" for I in inv.as_list())] for z, sg, Z, inv, fam in out]
        return _table_latex(["", "signs", "invariants"], rows), rep.exit_status() if rep else 0
    lines = []
    for z, sg, Z, inv, fam in out:
        tag = "".join("+" if v > 0 else "-" for v in sg)
        lines.append(f"Z{z}{'(' + tag + ')' if tag else ''} = {field_to_string(Z)}")
        lines.append("  shapes: " + ", ".join(str(s) for s in inv.shapes))
        lines.append("  invariants: " + ", ".join(to_string(I) for I in inv.as_list()))
        lines.append(f"  E = {to_string(fam.E_form)}, H = {to_string(fam.H_form)}" if fam
                     else f"  no invariant equation ({fam.reason})")
    return "\n".join(lines), rep.exit_status() if rep else 0


def _printed_row(e: invclass.ClassificationEntry) -> int | None:
    key = report._regime_key(e.regime)
    for row in report.golden("table3")["rows"]:
        if row["z"] != e.z:
            continue
        for inst in row["instances"]:
            if tuple(inst["signs"]) == tuple(e.signs) and \
                    report._regime_key(report._regime(inst["regime"])) == key:
                return row["row"]
    return None


def cmd_classify(args):
    params = _params(args)
    entries = invclass.classify_all(args.realization, params or None)
    if args.row is not None:
        if not 1 <= args.row <= len(entries):
            raise UsageError(f"argument --row: must lie in 1..{len(entries)}, got {args.row}")
        entries = [entries[args.row - 1]]
    rep = _stage("classify", args.strict) if args.verify else None
    status = rep.exit_status() if rep else 0
    if args.format == "json":
        rows = [{"row": e.row, "printed_row": _printed_row(e), "z": e.z, "a": e.a_indices,
                 "signs": list(e.signs), "regime": {str(k): to_string(v) for k, v in e.regime.items()},
                 "lambda": to_string(e.lam) if e.lam is not None else None,
                 "E": to_string(e.family.E_form) if e.family else None,
                 "H": to_string(e.family.H_form) if e.family else None,
                 "operators": [field_to_dict(X) for X in e.operators], "verified": e.verified}
                for e in entries]
        return _envelope("classify", _basis_json(liealg.canonical_basis()), {"classification": rows}, rep), status
    if args.format == "latex":
        lines = []
        for e in entries:
            pr = _printed_row(e)
            cond = ", ".join(f"{to_latex(k)}={to_latex(v)}" for k, v in e.regime.items())
            eq = (f"$E={to_latex(e.family.E_form)}$, $H={to_latex(e.family.H_form)}$" if e.family
                  else "no invariant equation")
            ops = ", ".join(f"${field_to_latex(X)}$" for X in e.operators)
            lam = f"${to_latex(e.lam)}$" if e.lam is not None else "--"
            zsig = "".join("+" if v > 0 else "-" for v in e.signs)
            lines.append(f"{pr if pr else '--'} & $Z^{{{e.z}}}{('_{' + zsig + '}') if zsig else ''}$"
                         f"{(' (' + '$' + cond + '$' + ')') if cond else ''} & {lam} & {eq} & {ops} \\\\")
        return "\n".join(lines), status
    blocks = []
    for e in entries:
        tag = "".join("+" if v > 0 else "-" for v in e.signs)
        head = f"row {e.row}: Z{e.z}{'(' + tag + ')' if tag else ''}"
        if e.regime:
            head += "  [" + ", ".join(f"{k} = {to_string(v)}" for k, v in e.regime.items()) + "]"
        pr = _printed_row(e)
        head += f"  (printed row {pr})" if pr else ""
        lines = [head]
        if e.family:
            lines += [f"  lambda = {to_string(e.lam)}", f"  E = {to_string(e.family.E_form)}",
                      f"  H = {to_string(e.family.H_form)}"]
        else:
            lines.append(f"  no invariant equation ({e.family.reason})")
        lines.append("  additional operators: " + "; ".join(field_to_string(X) for X in e.operators))
        lines.append(f"  verified: {e.verified}")
        blocks.append("\n".join(lines))
    return "\n".join(blocks), status


def cmd_verify_all(args):
    rep = report.verify_all(strict=args.strict)
    status = rep.exit_status()
    if args.format == "json":
        return rep.to_json(), status
    lines = [c.line() for c in rep.criteria]
    lines.append(f"comparisons: {len(rep.comparisons)}, deviations: {len(rep.deviations)} "
                 f"({len(rep.deviations) - len(rep.unexplained())} known, {len(rep.unexplained())} unexplained)"
                 + ("  [allowlist disabled]" if args.strict else ""))
    for d in rep.deviations:
        lines.append(f"  {'known:' + d.known if d.known else 'UNEXPLAINED'}  {d.id}: "
                     f"expected {d.expected}; computed {d.computed}")
    if args.format == "latex":
        body = [[str(c.number), c.title, "pass" if c.passed else "fail"] for c in rep.criteria]
        return _table_latex(["", "criterion", "result"], body), status
    return "\n".join(lines), status


HANDLERS = {
    "symmetries": cmd_symmetries, "equivalence-algebra": cmd_equivalence_algebra,
    "commutator-table": cmd_commutator_table, "adjoint-table": cmd_adjoint_table,
    "killing-form": cmd_killing_form, "flows": cmd_flows, "optimal-system": cmd_optimal_system,
    "normalize": cmd_normalize, "invariants": cmd_invariants, "classify": cmd_classify,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hceclass", description="Group classification of u_t = (E(x,u) u_x)_x + H(x,u).")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp_ = sub.add_parser(name)
        sp_.add_argument("--format", choices=("text", "json", "latex"), default="text")
        sp_.add_argument("--strict", action="store_true", help="disable the known-deviations allowlist")
        if name in ("symmetries", "equivalence-algebra"):
            sp_.add_argument("--degree", type=int, default=2)
        if name == "normalize":
            sp_.add_argument("--vector", help="six comma-separated rationals a1,...,a6")
        if name in ("invariants", "classify"):
            sp_.add_argument("--alpha", help="bind every alpha parameter to this rational p/q")
            sp_.add_argument("--beta", help="bind every beta parameter to this rational p/q")
            sp_.add_argument("--realization", choices=tuple(invclass.BASES), default="canonical")
        if name == "invariants":
            sp_.add_argument("--z", type=int, help="projection index 1..23 (default: all)")
        if name == "classify":
            sp_.add_argument("--row", type=int, help="only this computed row")
            sp_.add_argument("--verify", action="store_true", help="also compare with the printed table")
    return p


def _emit(payload, fmt: str) -> str:
    if fmt == "json" and not isinstance(payload, str):
        return json.dumps(payload, indent=1, ensure_ascii=False)
    return payload


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        if getattr(args, "degree", 0) < 0:
            raise UsageError("argument --degree: must be non-negative")
        try:
            optsys.seed_from_env()
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        payload, status = HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"hceclass: error: {exc}", file=sys.stderr)
        return 2
    print(_emit(payload, args.format))
    return status


if __name__ == "__main__":
    raise SystemExit(main())
