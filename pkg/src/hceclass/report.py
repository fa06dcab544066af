"""Golden-file comparisons, the deviations ledger and the acceptance criteria.

Every printed table lives under golden/ in the pinned expression grammar.  A
comparison that fails is a deviation; a deviation is known when an allowlist
entry covers its id (and, where the entry asks for it, when the printed
value is reproduced by the printed realization of the fourth generator).
"""

from __future__ import annotations

import fnmatch
import json
import random
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Callable

import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from . import detsys, invclass, jetcalc, liealg, optsys
from . import symexpr as S
from .formatting import field_from_dict, field_to_string, parse, to_string
from .jetcalc import EQUIV_COORDS, POINT_COORDS, VectorField, equivalence_field, point_field
from .symexpr import E, H, t, u, x

NAMES = liealg.NAMES


# ---------------------------------------------------------------- records

@dataclass
class Comparison:
    id: str
    stage: str
    expected: str
    computed: str
    match: bool
    printed_reproduced: bool | None = None
    note: str = ""

    def to_json(self) -> dict:
        d = {"id": self.id, "expected": self.expected, "computed": self.computed, "match": self.match}
        if self.printed_reproduced is not None:
            d["printed_reproduced"] = self.printed_reproduced
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class Deviation:
    id: str
    stage: str
    expected: str
    computed: str
    known: str | None  # allowlist entry id
    note: str = ""

    def to_json(self) -> dict:
        return {"id": self.id, "stage": self.stage, "expected": self.expected,
                "computed": self.computed, "allowlist": self.known, "note": self.note}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}: {self.title}" + (
            f" ({self.detail})" if self.detail else "")


@dataclass
class Report:
    stage: str
    comparisons: list[Comparison] = field(default_factory=list)
    deviations: list[Deviation] = field(default_factory=list)
    criteria: list[CriterionResult] = field(default_factory=list)
    timing: dict[str, float] = field(default_factory=dict)

    def unexplained(self) -> list[Deviation]:
        return [d for d in self.deviations if d.known is None]

    def known_entries(self) -> list[str]:
        return sorted({d.known for d in self.deviations if d.known})

    def exit_status(self) -> int:
        return 1 if self.unexplained() else 0

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "comparisons": [c.to_json() for c in self.comparisons],
            "deviations": [d.to_json() for d in self.deviations],
            "criteria": [{"number": c.number, "title": c.title, "passed": c.passed, "detail": c.detail}
                         for c in self.criteria],
            "timing": {k: round(v, 3) for k, v in self.timing.items()},
        }


# ---------------------------------------------------------------- golden files

@lru_cache(maxsize=None)
def golden(name: str) -> dict:
    path = resources.files("hceclass") / "golden" / f"{name}.json"
    return json.loads(path.read_text(encoding="utf-8"))


def allowlist() -> list[dict]:
    return golden("deviations")["allowlist"]


def attribute(comp: Comparison, entries: list[dict] | None) -> str | None:
    """The most specific allowlist entry covering a failed comparison."""
    best, best_len = None, -1
    for entry in entries or []:
        if entry.get("requires_printed_reproduction") and not comp.printed_reproduced:
            continue
        for pat in entry["covers"]:
            if fnmatch.fnmatchcase(comp.id, pat) and len(pat) > best_len:
                best, best_len = entry["id"], len(pat)
    return best


def _same(a, b) -> bool:
    return S.vanishes(sp.sympify(a) - sp.sympify(b))


def _fields_equal(A: VectorField, B: VectorField) -> bool:
    coords = tuple(dict.fromkeys(A.coords + B.coords))
    return all(_same(A[c], B[c]) for c in coords)


def _vec_string(v, names=NAMES) -> str:
    parts = []
    for c, n in zip(v, names):
        c = sp.sympify(c)
        if c == 0:
            continue
        txt = to_string(c)
        term = n if txt == "1" else f"-{n}" if txt == "-1" else f"({txt})*{n}" if c.is_Add else f"{txt}*{n}"
        parts.append(term)
    out = " + ".join(parts).replace("+ -", "- ")
    return out or "0"


# ---------------------------------------------------------------- stages

def compare_symmetries() -> list[Comparison]:
    out = []
    gold = field_from_dict(golden("point_solution")["coefficients"], POINT_COORDS)
    c = S.lookup("c")
    for deg in (0, 1, 2):
        sol = detsys.solve_polynomial_ansatz(detsys.determining_system("point"), deg)
        ok = len(sol.basis) == 1 and _proportional(sol.basis[0], gold.subs({c: 1}))
        out.append(Comparison(f"point-kernel/degree-{deg}", "symmetries", field_to_string(gold.subs({c: 1})),
                              "; ".join(field_to_string(b) for b in sol.basis), ok))
    out.extend(compare_characteristic())
    out.extend(compare_determining_point())
    return out


def _proportional(A: VectorField, B: VectorField) -> bool:
    ratios = set()
    for cc in tuple(dict.fromkeys(A.coords + B.coords)):
        a, b = sp.expand(A[cc]), sp.expand(B[cc])
        if (a == 0) != (b == 0):
            return False
        if a != 0:
            ratios.add(sp.cancel(a / b))
    return len(ratios) == 1 and next(iter(ratios)).is_number


def compare_characteristic() -> list[Comparison]:
    """The printed characteristic, tried on the kernel field d_t."""
    printed = parse(golden("characteristic")["Q"].replace("xi", "1").replace("tau", "0"))
    Y = point_field(1, 0, 0)
    computed = jetcalc.characteristic(Y)
    residual = detsys.printed_characteristic_residual(Y)
    return [Comparison("characteristic/Q", "symmetries", to_string(printed), to_string(computed),
                       _same(printed, computed),
                       note=f"printed form leaves residual {to_string(residual)} on d_t")]


_UNKNOWN_RE = re.compile(r"\b(xi|tau|phi)(?:_([txu]+))?\b")


def parse_determining(text: str) -> sp.Expr:
    """Printed determining equations: xi_x, tau_uu, ... stand for partials of the unknowns."""
    funcs = {"xi": detsys.XI, "tau": detsys.TAU, "phi": detsys.PHI}
    local: dict = {}

    def repl(m):
        f = funcs[m.group(1)](t, x, u)
        for ch in m.group(2) or "":
            f = sp.diff(f, {"t": t, "x": x, "u": u}[ch])
        key = f"__u{len(local)}"
        local[key] = f
        return key

    body = _UNKNOWN_RE.sub(repl, text)
    for tok in set(re.findall(r"\b[A-Za-z][A-Za-z0-9_]*\b", body)):
        if tok.startswith("__u"):
            continue
        local[tok] = S.lookup(tok)
    return sp.expand(parse_expr(body, local_dict=local,
                                transformations=standard_transformations + (convert_xor,)))


def _primitive(r: sp.Expr) -> sp.Expr:
    """Drop the rational content and any power of E (E > 0) common to all terms."""
    _, rest = sp.factor_terms(r).as_coeff_Mul()
    keep = [f for f in sp.Mul.make_args(rest) if f.as_base_exp()[0] != E]
    return sp.expand(sp.Mul(*keep))


def reduced_point_system() -> list[sp.Expr]:
    """Point determining equations after using xi_x = xi_u = 0 and their consequences."""
    xi = detsys.XI(t, x, u)
    kill = lambda z: isinstance(z, sp.Derivative) and z.expr == xi and any(
        v in (x, u) for v, _ in z.variable_count)
    out = []
    for eq in detsys.determining_system("point").equations:
        r = sp.expand(eq.replace(kill, lambda z: sp.S.Zero))
        if r == 0:
            continue
        r = _primitive(r)
        if all(sp.expand(r - q) != 0 and sp.expand(r + q) != 0 for q in out):
            out.append(r)
    return out


def _rational_multiple(a: sp.Expr, b: sp.Expr) -> bool:
    if sp.expand(a) == 0 or sp.expand(b) == 0:
        return False
    return sp.cancel(_primitive(a) / _primitive(b)).is_Rational


def compare_determining_point() -> list[Comparison]:
    derived = [_primitive(e) for e in detsys.determining_system("point").equations] + reduced_point_system()
    out = []
    for k, text in enumerate(golden("determining_point")["equations"], 1):
        p = parse_determining(text)
        hit = next((d for d in derived if _rational_multiple(d, p)), None)
        out.append(Comparison(f"determining/line-{k}", "symmetries", text,
                              str(hit) if hit is not None else
                              f"not a rational multiple of any of the {len(derived)} derived equations",
                              hit is not None))
    return out


def compare_equivalence() -> list[Comparison]:
    out = []
    canon, printed = liealg.canonical_basis(), liealg.printed_basis()
    for i, g in enumerate(golden("equivalence_generators")["basis"]):
        F = field_from_dict(g["coefficients"])
        out.append(Comparison(f"generators/{g['name']}", "equivalence-algebra", field_to_string(F),
                              field_to_string(canon[i]), _fields_equal(F, canon[i]),
                              printed_reproduced=_fields_equal(F, printed[i]),
                              note=str(detsys.verify_generator(F, "equivalence"))))
    gs = golden("general_solution")["coefficients"]
    G = field_from_dict(gs)
    for k in range(1, 7):
        ck = S.lookup(f"c{k}")
        D = VectorField(EQUIV_COORDS, {c: sp.diff(G[c], ck) for c in EQUIV_COORDS})
        verdict = detsys.verify_generator(D, "equivalence")
        try:
            coords = _vec_string(liealg.coordinates_in(canon, D))
        except liealg.NotClosed:
            coords = "outside the algebra"
        out.append(Comparison(f"general-solution/c{k}", "equivalence-algebra", field_to_string(D),
                              coords, bool(verdict), note=repr(verdict)[:200]))
    return out


def _golden_table(name: str):
    return {(e["row"], e["col"]): e["value"] for e in golden(name)["entries"]}


def compare_table1() -> list[Comparison]:
    basis = liealg.canonical_basis()
    out = []
    for (r, c), val in _golden_table("table1").items():
        i, j = NAMES.index(r), NAMES.index(c)
        got = liealg.coordinates_in(basis, liealg.bracket(basis[i], basis[j]))
        exp = [Fraction(val.get(n, "0")) for n in NAMES]
        out.append(Comparison(f"table1/{r},{c}", "commutator-table", _vec_string(exp),
                              _vec_string(got), exp == got))
    return out


def compare_table2() -> list[Comparison]:
    out = []
    for (r, c), val in _golden_table("table2").items():
        i, j = NAMES.index(r), NAMES.index(c)
        got = [e.to_sympy() for e in liealg.adjoint_action(i, j)]
        exp = [parse(val.get(n, "0")) for n in NAMES]
        out.append(Comparison(f"table2/{r},{c}", "adjoint-table", _vec_string(exp), _vec_string(got),
                              all(_same(a, b) for a, b in zip(exp, got))))
    return out


def compare_killing() -> list[Comparison]:
    gold = golden("killing")
    K = liealg.killing_matrix()
    exp = [[Fraction(0)] * 6 for _ in range(6)]
    for e in gold["coefficients"]:
        exp[e["i"] - 1][e["j"] - 1] = Fraction(e["value"])
    out = [Comparison(f"killing/{NAMES[i]},{NAMES[j]}", "killing-form", str(exp[i][j]), str(K[i][j]),
                      exp[i][j] == K[i][j]) for i in range(6) for j in range(6)]
    degenerate = any(all(K[i][j] == 0 for j in range(6)) for i in range(6))
    out.append(Comparison("killing/degenerate", "killing-form", str(gold["degenerate"]), str(degenerate),
                          gold["degenerate"] == degenerate))
    series = liealg.derived_series()
    want = golden("derived_series")["series"]
    for k, names in enumerate(want, 1):
        exp_rows = [liealg.unit(6, NAMES.index(n)) for n in names]
        got_rows = series[k - 1] if k - 1 < len(series) else []
        ok = _same_span(exp_rows, got_rows)
        out.append(Comparison(f"derived-series/L{k}", "killing-form", ", ".join(names) or "0",
                              "; ".join(_vec_string(r) for r in got_rows) or "0", ok))
    return out


def _same_span(A, B) -> bool:
    from . import linalg
    ra, rb = linalg.rank(A, 6) if A else 0, linalg.rank(B, 6) if B else 0
    return ra == rb and (linalg.rank(list(A) + list(B), 6) if A or B else 0) == ra


def compare_flows() -> list[Comparison]:
    out = []
    for i, g in enumerate(golden("flows")["flows"]):
        F = liealg.flow(i)
        for c in EQUIV_COORDS:
            exp = parse(g["map"][str(c)])
            out.append(Comparison(f"flows/{g['name']}/{c}", "flows", to_string(exp), to_string(F.maps[c]),
                                  _same(exp, F.maps[c])))
    table = {**liealg.REFLECTIONS}
    for g in golden("reflections")["reflections"]:
        F = table[g["coord"]]
        ok = all(_same(parse(g["map"].get(str(c), str(c))), F.maps[c]) for c in EQUIV_COORDS)
        out.append(Comparison(f"reflections/{g['coord']}", "flows", json.dumps(g["map"]),
                              json.dumps({str(c): to_string(v) for c, v in F.maps.items() if v != c}), ok))
    for i, g in enumerate(golden("solution_rules")["rules"]):
        rule = liealg.transform_solution(i)
        printed = liealg.SolutionRule(i, parse(g["solution"]), parse(g["E_bar"]), parse(g["H_bar"]),
                                      sp.S.One, sp.S.One)
        printed_ok = liealg.verify_rule(printed)
        for key, got in (("solution", rule.solution), ("E_bar", rule.E_bar), ("H_bar", rule.H_bar)):
            exp = parse(g[key])
            out.append(Comparison(f"solution-rules/{g['name']}/{key}", "flows", to_string(exp), to_string(got),
                                  _same(exp, got),
                                  note="" if _same(exp, got) else
                                  f"printed rule {'verifies' if printed_ok else 'does not verify'}"))
    return out


def compare_optimal_system() -> list[Comparison]:
    out = []
    canon, printed = liealg.canonical_basis(), liealg.printed_basis()
    for item in golden("optimal_system")["representatives"]:
        rep = optsys.REPRESENTATIVES[item["index"]]
        for inst in item["instances"]:
            sg = tuple(inst["signs"])
            tag = "".join("+" if v > 0 else "-" for v in sg)
            cid = f"optimal-system/A{rep.index}" + (f"/{tag}" if tag else "")
            comb = [parse(inst["combination"].get(n, "0")) for n in NAMES]
            vec = rep.vector(sg)
            ok = all(_same(a, sp.sympify(b)) for a, b in zip(comb, vec))
            out.append(Comparison(cid + "/combination", "optimal-system", _vec_string(comb), _vec_string(vec), ok))
            F = field_from_dict(inst["coefficients"])
            got = rep.field(sg, basis=canon)
            out.append(Comparison(cid, "optimal-system", field_to_string(F), field_to_string(got),
                                  _fields_equal(F, got),
                                  printed_reproduced=_fields_equal(F, rep.field(sg, basis=printed))))
    return out


def compare_projections() -> list[Comparison]:
    out = []
    canon, printed = liealg.canonical_basis(), liealg.printed_basis()
    for item in golden("projections")["projections"]:
        z = item["index"]
        got_members = optsys.a_indices_of(z)
        out.append(Comparison(f"projections/Z{z}/members", "optimal-system",
                              ",".join(f"A{i}" for i in item["a_indices"]),
                              ",".join(f"A{i}" for i in got_members), item["a_indices"] == got_members))
        rep = optsys.REPRESENTATIVES[item["a_indices"][0]]
        for inst in item["instances"]:
            sg = tuple(inst["signs"])
            tag = "".join("+" if v > 0 else "-" for v in sg)
            F = field_from_dict(inst["coefficients"], optsys.PROJECTED_COORDS)
            got = optsys.project(rep.field(sg, basis=canon))
            out.append(Comparison(f"projections/Z{z}" + (f"/{tag}" if tag else ""), "optimal-system",
                                  field_to_string(F), field_to_string(got), _fields_equal(F, got),
                                  printed_reproduced=_fields_equal(
                                      F, optsys.project(rep.field(sg, basis=printed)))))
    zero = optsys.project(optsys.REPRESENTATIVES[1].field()).is_zero()
    out.append(Comparison("projections/A1", "optimal-system", "0", "0" if zero else "nonzero", zero))
    return out


_SCALED = {"1": 6, "2a": 5, "2b-1": 4, "2b-2-1": 3, "2b-2-2": 2}


def _step_value(step: dict) -> tuple[sp.Expr, bool]:
    """Apply the printed move to its state; coefficients a1..a6 are positive symbols."""
    syms = {f"a{k}": sp.Symbol(f"a{k}", positive=True) for k in range(1, 7)}
    state = [sp.sympify(v, locals=syms) for v in step["state"]]
    # Vanishing coefficients and the one the case scaled to 1 enter the
    # parameter with their value; the others keep their original names.
    env = {**syms, "ln": sp.log, "exp": sp.exp}
    scaled = max((p for p in _SCALED if step["case"].startswith(p)), key=len)
    for k, v in enumerate(state, 1):
        if v == 0 or k == _SCALED[scaled]:
            env[f"a{k}"] = v
    param = sp.sympify(step["parameter"], locals=env)
    i = NAMES.index(step["generator"])
    A = liealg.adjoint_matrix(i)
    k = step["goal"]["coefficient"] - 1
    if param.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
        return param, False
    val = sp.simplify(sum(A[k][j].to_sympy().subs(S.s, param) * state[j] for j in range(6)))
    target = step["goal"]["target"]
    ok = val == 0 if target == "zero" else val in (1, -1)
    return val, bool(ok)


def compare_proof_steps() -> list[Comparison]:
    out = []
    syms = {f"a{k}": sp.Symbol(f"a{k}", positive=True) for k in range(1, 7)}
    for step in golden("proof_steps")["steps"]:
        val, ok = _step_value(step)
        exp = "0" if step["goal"]["target"] == "zero" else "+-1"
        out.append(Comparison(f"proof/{step['id']}", "optimal-system", f"{step['printed']}: a{step['goal']['coefficient']} -> {exp}",
                              to_string(val), ok))
        if "printed_result" in step:
            state = [sp.sympify(v, locals=syms) for v in step["state"]]
            i = NAMES.index(step["generator"])
            A = liealg.adjoint_matrix(i)
            param = sp.sympify(step["parameter"], locals={**syms, "ln": sp.log})
            new = [sp.simplify(sum(A[r][j].to_sympy().subs(S.s, param) * state[j] for j in range(6)))
                   for r in range(6)]
            want = [sp.sympify(v, locals=syms) for v in step["printed_result"]]
            out.append(Comparison(f"proof/{step['id']}/result", "optimal-system", _vec_string(want),
                                  _vec_string(new), all(sp.simplify(a - b) == 0 for a, b in zip(want, new))))
    return out


# ---------------------------------------------------------------- invariants and the classification table

def _fill_arbitrary(text: str, lam: sp.Expr | None) -> sp.Expr:
    """Bare Phi, Psi in a printed form stand for functions of the invariant."""
    if lam is not None:
        text = re.sub(r"\b(Phi|Psi)\b(?!\s*\()", lambda m: f"{m.group(1)}({to_string(lam)})", text)
    return parse(text)


def _regime(d: dict) -> dict:
    return {S.lookup(k): parse(v) for k, v in d.items()}


def _regime_key(d: dict) -> tuple:
    return tuple(sorted((str(k), to_string(v)) for k, v in d.items()))


def _ops_key(ops) -> frozenset:
    return frozenset(field_to_string(invclass.canonical_operator(X)) for X in ops)


@dataclass
class RowCheck:
    lam: bool
    X: bool
    forms: bool
    verified: bool
    detail: str

    @property
    def ok(self) -> bool:
        return self.lam and self.X and self.forms and self.verified


def _check_instance(inst: dict, entry: invclass.ClassificationEntry | None) -> RowCheck:
    if entry is None:
        return RowCheck(False, False, False, False, "no computed instance for this regime")
    reg = _regime(inst["regime"])
    gold_ops = [field_from_dict(X, POINT_COORDS).subs(reg) for X in inst["X"]]
    X_ok = _ops_key(gold_ops) == _ops_key(entry.operators)
    if "lambda" not in inst:
        none = isinstance(entry.family, invclass.NoInvariantEquation)
        return RowCheck(none, X_ok, none, none, "no invariant equation printed")
    lam_g = invclass.canonical_invariant(parse(inst["lambda"]).subs(reg))
    if entry.lam is None:
        return RowCheck(False, X_ok, False, False, "computed instance has no invariant equation")
    lam_c = invclass.canonical_invariant(entry.lam)
    lam_ok = to_string(lam_g) == to_string(lam_c)
    Eg = _fill_arbitrary(inst["E"], entry.lam).subs(reg)
    Hg = _fill_arbitrary(inst["H"], entry.lam).subs(reg)
    forms = invclass.form_invariant(entry.Z, E, Eg) and invclass.form_invariant(entry.Z, H, Hg)
    verified = forms and invclass.verify_family(invclass.Family(Eg, Hg, entry.lam), gold_ops)
    bad = [n for n, ok in (("lambda", lam_ok), ("X", X_ok), ("E/H annihilation", forms),
                           ("verification", verified)) if not ok]
    detail = "" if not bad else "mismatch in " + ", ".join(bad) + (
        f"; computed lambda {to_string(lam_c)}" if not lam_ok else "")
    return RowCheck(lam_ok, X_ok, forms, verified, detail)


@lru_cache(maxsize=None)
def classification(realization: str = "canonical") -> tuple:
    return tuple(invclass.classify_all(realization))


def _lookup_entry(entries, z: int, signs: tuple, regime: dict):
    key = _regime_key(_regime(regime))
    for e in entries:
        if e.z == z and tuple(e.signs) == signs and _regime_key(e.regime) == key:
            return e
    return None


def compare_table3() -> list[Comparison]:
    canon, printed = classification("canonical"), classification("printed")
    out = []
    for row in golden("table3")["rows"]:
        for inst in row["instances"]:
            sg = tuple(inst["signs"])
            tag = "".join("+" if v > 0 else "-" for v in sg)
            cid = f"table3/row-{row['row']}" + (f"/{tag}" if tag else "")
            c = _check_instance(inst, _lookup_entry(canon, row["z"], sg, inst["regime"]))
            p = _check_instance(inst, _lookup_entry(printed, row["z"], sg, inst["regime"]))
            expected = "; ".join(f"{k}={inst[k]}" for k in ("lambda", "E", "H") if k in inst)
            out.append(Comparison(cid, "classify", expected, "regenerated" if c.ok else c.detail, c.ok,
                                  printed_reproduced=p.lam and p.X and p.forms,
                                  note="" if c.ok else f"printed realization: {p.detail or 'matches'}"))
    z4 = invclass.reconstruct_equation(invclass.invariants_of(invclass.z_field(4)))
    out.append(Comparison("table3/Z4", "classify", "NoInvariantEquation", type(z4).__name__,
                          isinstance(z4, invclass.NoInvariantEquation)))
    return out


def compare_invariants() -> list[Comparison]:
    gold = golden("invariants")
    out = []
    Z4 = invclass.z_field(4)
    inv4 = [parse(v) for v in gold["Z4"]["I"]]
    ok = all(invclass.annihilates(Z4, I) for I in inv4) and sp.Matrix(
        [[sp.diff(I, c) for c in optsys.PROJECTED_COORDS] for I in inv4]).rank() == 3
    out.append(Comparison("invariants/Z4", "invariants", ", ".join(gold["Z4"]["I"]),
                          ", ".join(to_string(I) for I in invclass.invariants_of(Z4).as_list()), ok))
    for inst in gold["Z23"]["instances"]:
        canon = _z23_checks(inst, "canonical")
        printed = _z23_checks(inst, "printed")
        for key, (exp, got, ok) in canon.items():
            out.append(Comparison(key, "invariants", exp, got, ok, printed_reproduced=printed[key][2]))
    return out


def _z23_checks(inst: dict, realization: str) -> dict[str, tuple[str, str, bool]]:
    sg = tuple(inst["signs"])
    tag = f"invariants/Z23/{'+' if sg[0] > 0 else '-'}"
    Z = invclass.z_field(23, sg, None, realization)
    computed = invclass.invariants_of(Z)
    out = {}
    for k, text in enumerate(inst["I"], 1):
        out[f"{tag}/I{k}"] = (text, to_string(computed.as_list()[k - 1]),
                              invclass.annihilates(Z, parse(text)))
    lam_g = invclass.canonical_invariant(parse(inst["lambda"]))
    lam_c = invclass.canonical_invariant(computed.lam)
    out[f"{tag}/lambda"] = (to_string(lam_g), to_string(lam_c), to_string(lam_g) == to_string(lam_c))
    fam = invclass.reconstruct_equation(computed)
    for key, coord in (("E", E), ("H", H)):
        F = _fill_arbitrary(inst[key], computed.lam)
        out[f"{tag}/{key}"] = (inst[key], to_string(getattr(fam, f"{key}_form")),
                               invclass.form_invariant(Z, coord, F))
    X = field_from_dict(inst["X"], POINT_COORDS)
    ops = invclass.operators_for(23, sg, None, realization)
    out[f"{tag}/X"] = (field_to_string(X), "; ".join(field_to_string(o) for o in ops),
                       _ops_key([X]) == _ops_key(ops))
    return out


STAGES: dict[str, Callable[[], list[Comparison]]] = {
    "symmetries": compare_symmetries,
    "equivalence-algebra": compare_equivalence,
    "commutator-table": compare_table1,
    "adjoint-table": compare_table2,
    "killing-form": compare_killing,
    "flows": compare_flows,
    "optimal-system": lambda: compare_optimal_system() + compare_projections() + compare_proof_steps(),
    "invariants": compare_invariants,
    "classify": compare_table3,
}


def deviations_of(comparisons: list[Comparison], entries: list[dict] | None) -> list[Deviation]:
    return [Deviation(c.id, c.stage, c.expected, c.computed, attribute(c, entries), c.note)
            for c in comparisons if not c.match]


def stage_report(stage: str, strict: bool = False) -> Report:
    t0 = time.perf_counter()
    comps = STAGES[stage]()
    rep = Report(stage, comps, deviations_of(comps, None if strict else allowlist()))
    rep.timing[stage] = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------- acceptance criteria

def _all_match(comps: list[Comparison]) -> tuple[bool, str]:
    bad = [c.id for c in comps if not c.match]
    return not bad, (f"{len(bad)} mismatched: " + ", ".join(bad[:8]) + (" ..." if len(bad) > 8 else "")) if bad \
        else f"{len(comps)} entries"


def criterion_1() -> CriterionResult:
    ok, detail = _all_match([c for c in compare_symmetries() if c.id.startswith("point-kernel/")])
    return CriterionResult(1, "point-symmetry kernel is span{d_t} at degrees 0, 1, 2", ok, detail)


def criterion_2() -> CriterionResult:
    sol = detsys.solve_polynomial_ansatz(detsys.determining_system("equivalence"), 2)
    canon = liealg.canonical_basis()
    try:
        rows = [liealg.coordinates_in(canon, b) for b in sol.basis]
        from . import linalg
        spans = len(sol.basis) == 6 and linalg.rank(rows, 6) == 6
    except liealg.NotClosed:
        spans = False
    valid = all(bool(detsys.verify_generator(Y, "equivalence")) for Y in canon)
    return CriterionResult(2, "equivalence algebra is six-dimensional and spanned by Y1..Y6", spans and valid,
                           f"dimension {len(sol.basis)}, generators valid: {valid}")


def _rand_vec(rng: random.Random) -> list[Fraction]:
    return [Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(6)]


def criterion_3(seed: int) -> CriterionResult:
    ok, detail = _all_match(compare_table1())
    alg = liealg.canonical_algebra()
    rng = random.Random(seed)
    props = True
    for _ in range(100):
        a, b, c = _rand_vec(rng), _rand_vec(rng), _rand_vec(rng)
        br = alg.bracket_vec
        jac = [p + q + r for p, q, r in zip(br(a, br(b, c)), br(b, br(c, a)), br(c, br(a, b)))]
        anti = [p + q for p, q in zip(br(a, b), br(b, a))]
        props &= not any(jac) and not any(anti)
    return CriterionResult(3, "commutator table, Jacobi identity and antisymmetry", ok and props,
                           detail + ("" if props else "; property failure"))


def criterion_4() -> CriterionResult:
    K = liealg.killing_matrix()
    closed = all(K[i][j] == liealg.killing_closed_form(liealg.unit(6, i), liealg.unit(6, j))
                 for i in range(6) for j in range(6))
    kernel = all(K[i][j] == 0 for i in range(3) for j in range(6))
    ok, detail = _all_match([c for c in compare_killing() if c.id.startswith("killing/")])
    return CriterionResult(4, "Killing form and its kernel", closed and kernel and ok, detail)


def criterion_5() -> CriterionResult:
    ok, detail = _all_match([c for c in compare_killing() if c.id.startswith("derived-series/")])
    return CriterionResult(5, "derived series span{Y1, Y2, Y3} then 0", ok, detail)


def criterion_6() -> CriterionResult:
    ok, detail = _all_match(compare_table2())
    s1, s2 = sp.Symbol("s1"), sp.Symbol("s2")
    alg = liealg.canonical_algebra()
    props = True
    for i in range(6):
        A = liealg.adjoint_matrix(i)
        M = sp.Matrix(6, 6, lambda r, c: A[r][c].to_sympy())
        props &= sp.simplify(M.subs(S.s, s1) * M.subs(S.s, s2) - M.subs(S.s, s1 + s2)) == sp.zeros(6, 6)
        ad = alg.ad(liealg.unit(6, i))
        props &= all(A[r][c].derivative().at_zero() == -ad[r][c] for r in range(6) for c in range(6))
        props &= all(A[r][c].at_zero() == (1 if r == c else 0) for r in range(6) for c in range(6))
    return CriterionResult(6, "adjoint table, group law and derivative at zero", ok and props,
                           detail + ("" if props else "; property failure"))


def criterion_7() -> CriterionResult:
    flows = [c for c in compare_flows() if c.id.startswith("flows/")]
    ok, detail = _all_match(flows)
    rules = all(liealg.verify_rule(liealg.transform_solution(i)) for i in range(6))
    return CriterionResult(7, "flows match and solution rules verify", ok and rules,
                           detail + f"; rules verify: {rules}")


def criterion_8(seed: int) -> CriterionResult:
    rep = optsys.verify_optimal_list(seed, 1000)
    per = {}
    for idx, *_ in rep.branch_results:
        per[idx] = per.get(idx, 0) + 1
    enough = len(rep.branch_results) >= 40 and all(per.get(i, 0) >= 2 for i in optsys.REPRESENTATIVES)
    bad = [r for r in rep.random_results if not isinstance(r[1], int) or not r[2]]
    return CriterionResult(8, "normalizer reaches one of the 29 representatives with a valid word",
                           rep.ok and enough,
                           f"{len(rep.branch_results)} branch vectors, 1000 random (seed {seed}), "
                           f"{len(bad)} failures")


def criterion_9(entries: list[dict]) -> CriterionResult:
    comps = compare_projections()
    members = all(c.match for c in comps if c.id.endswith("/members") or c.id == "projections/A1")
    unexplained = [c.id for c in comps if not c.match and attribute(c, entries) is None]
    return CriterionResult(9, "projections reproduce the A -> Z correspondence", members and not unexplained,
                           "unexplained: " + ", ".join(unexplained) if unexplained else
                           "fields differing only through the printed fourth generator are attributed")


def criterion_10(entries: list[dict]) -> CriterionResult:
    comps = compare_table3()
    rows: dict[str, list[Comparison]] = {}
    for c in comps:
        if c.id.startswith("table3/row-"):
            rows.setdefault(c.id.split("/")[1], []).append(c)
    z4 = next(c for c in comps if c.id == "table3/Z4")
    if not z4.match:
        rows["Z4"] = [z4]
    passed, covered, failed = [], [], []
    for r, cs in rows.items():
        if all(c.match for c in cs):
            passed.append(r)
        elif all(c.match or attribute(c, entries) for c in cs):
            covered.append(r)
        else:
            failed.append(r)
    detail = f"{len(passed)} regenerated, {len(covered)} explained by the printed fourth generator, " \
             f"{len(failed)} unexplained" + (": " + ", ".join(failed) if failed else "")
    return CriterionResult(10, "classification table regenerates", not failed, detail)


def criterion_12(seed: int) -> CriterionResult:
    rng = random.Random(seed)
    monos = [sp.S.One, t, x, u, t * t, t * x, t * u, x * x, x * u, u * u]
    bad = 0
    for _ in range(50):
        def poly():
            return sum(rng.randint(-3, 3) * m for m in monos if rng.random() < 0.5)
        Y = point_field(poly(), poly(), poly())
        a, b = jetcalc.prolong2(Y), jetcalc.prolong2_characteristic(Y)
        if any(sp.expand(a.jet_coeffs[k] - b.jet_coeffs[k]) != 0 for k in a.jet_coeffs):
            bad += 1
    return CriterionResult(12, "iterated and characteristic prolongations agree", bad == 0,
                           f"50 random generators (seed {seed}), {bad} disagreements")


CRITERIA_TITLES = {11: "allowlisted deviations are exactly the five known misprints"}


def verify_all(strict: bool = False, seed: int | None = None) -> Report:
    """Every stage's comparisons plus every acceptance criterion."""
    seed = optsys.seed_from_env() if seed is None else seed
    entries = None if strict else allowlist()
    rep = Report("verify-all")
    for name, fn in STAGES.items():
        t0 = time.perf_counter()
        rep.comparisons.extend(fn())
        rep.timing[name] = time.perf_counter() - t0
    rep.deviations = deviations_of(rep.comparisons, entries)
    t0 = time.perf_counter()
    crits = [criterion_1(), criterion_2(), criterion_3(seed), criterion_4(), criterion_5(), criterion_6(),
             criterion_7(), criterion_8(seed), criterion_9(allowlist()), criterion_10(allowlist())]
    full = rep if not strict else Report("verify-all", rep.comparisons,
                                         deviations_of(rep.comparisons, allowlist()))
    used = full.known_entries()
    five = sorted(e["id"] for e in allowlist())
    crits.append(CriterionResult(11, CRITERIA_TITLES[11], not full.unexplained() and used == five,
                                 f"{len(full.unexplained())} unexplained deviations; "
                                 f"allowlist entries hit: {', '.join(used) or 'none'}"))
    crits.append(criterion_12(seed))
    rep.criteria = sorted(crits, key=lambda c: c.number)
    rep.timing["criteria"] = time.perf_counter() - t0
    return rep
