"""Determining systems, polynomial-ansatz solving and generator verification.

The invariance condition of u_t = (E u_x)_x + H is split over the jet
monomials that remain after eliminating u_t.  In the point problem E, H and
their partials are arbitrary coefficients; in the equivalence problem E, H
are coordinates and their first partials are split over as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Literal, Sequence

import sympy as sp

from . import linalg
from . import symexpr as S
from .jetcalc import (EQUIV_COORDS, POINT_COORDS, VectorField, prolong2,
                      prolong_equivalence, point_field, equivalence_field)
from .symexpr import E, H, t, u, x, formal, symbol_info, Kind

KindName = Literal["point", "equivalence"]

EQUATION = S.u_t - E * S.u_xx - S.E_x * S.u_x - S.E_u * S.u_x ** 2 - H
U_T_RULE = {S.u_t: E * S.u_xx + S.E_x * S.u_x + S.E_u * S.u_x ** 2 + H}
STATIONARY = {S.E_t: 0, S.H_t: 0}

POINT_KERNELS = (S.u_x, S.u_tt, S.u_tx, S.u_xx)
EQUIV_KERNELS = POINT_KERNELS + (S.E_x, S.E_u, S.H_x, S.H_u)

XI, TAU, PHI, CHI, ETA = (sp.Function(n) for n in ("xi", "tau", "phi", "chi", "eta"))


class EmptySystem(ValueError):
    """The determining system has no equations."""


@dataclass(frozen=True)
class Valid:
    def __bool__(self) -> bool:
        return True

    def __repr__(self) -> str:
        return "Valid"


@dataclass(frozen=True)
class Invalid:
    residual: sp.Expr

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"Invalid({self.residual})"


@dataclass
class DeterminingSystem:
    kind: str
    unknowns: list[sp.Expr]
    equations: list[sp.Expr]
    monomial_log: list[tuple[str, sp.Expr, sp.Expr]] = field(default_factory=list)


@dataclass
class AnsatzSolution:
    basis: list[VectorField]
    degree: int
    residual_rank: tuple[int, int]  # (rank, number of ansatz coefficients)


# ---------------------------------------------------------------- residuals

def _point_kernel_action(Y: VectorField, sym: sp.Symbol) -> sp.Expr:
    """Y applied to a formal partial E_K of E(x, u): tau E_{K+x} + phi E_{K+u}."""
    info = symbol_info(sym)
    it, ix, iu = info.index
    return Y[x] * formal(info.base, (it, ix + 1, iu)) + Y[u] * formal(info.base, (it, ix, iu + 1))


def _point_residual(Y: VectorField, jets: dict) -> sp.Expr:
    out = []
    for sym in EQUATION.free_symbols:
        d = sp.diff(EQUATION, sym)
        info = symbol_info(sym)
        if info.kind == Kind.FORMAL_DERIVATIVE:
            out.append(_point_kernel_action(Y, sym) * d)
        elif sym in jets:
            out.append(jets[sym] * d)
    return sp.expand(sp.Add(*out).subs(U_T_RULE))


def invariance_residual(Y: VectorField, kind: KindName) -> sp.Expr:
    """Prolonged field applied to the equation, on the equation manifold."""
    if kind == "point":
        Y = Y.restrict(POINT_COORDS)
        return _point_residual(Y, prolong2(Y).jet_coeffs)
    if kind == "equivalence":
        Y = Y.restrict(EQUIV_COORDS)
        pr = prolong_equivalence(Y)
        return sp.expand(pr(EQUATION).subs(U_T_RULE).subs(STATIONARY))
    raise ValueError(f"unknown kind {kind!r}")


def auxiliary_residuals(Y: VectorField) -> list[sp.Expr]:
    """Invariance of E_t = 0 and H_t = 0 under an equivalence field."""
    pr = prolong_equivalence(Y.restrict(EQUIV_COORDS))
    return [sp.expand(pr.jet_coeffs[S.E_t].subs(STATIONARY)),
            sp.expand(pr.jet_coeffs[S.H_t].subs(STATIONARY))]


def printed_characteristic_residual(Y: VectorField) -> sp.Expr:
    """Point residual when the jet coefficients come from u - xi u_t - tau u_x.

    Used only to show that this leading term cannot reproduce the kernel.
    """
    Y = Y.restrict(POINT_COORDS)
    jets = prolong2(point_field(Y[t], Y[x], u)).jet_coeffs
    return _point_residual(Y, jets)


# ---------------------------------------------------------------- splitting

def generic_field(kind: KindName) -> VectorField:
    args = (t, x, u)
    if kind == "point":
        return point_field(XI(*args), TAU(*args), PHI(*args))
    return equivalence_field(XI(*args), TAU(*args), PHI(*args),
                             CHI(t, x, u, E, H), ETA(t, x, u, E, H))


def _unknowns(kind: KindName) -> list[sp.Expr]:
    Y = generic_field(kind)
    return [Y[c] for c in (POINT_COORDS if kind == "point" else EQUIV_COORDS)]


def _primitive(eq: sp.Expr) -> sp.Expr:
    eq = sp.expand(eq)
    content, prim = eq.as_content_primitive()
    return sp.expand(prim)


def split_determining(residual: sp.Expr, kind: KindName,
                      auxiliary: Sequence[sp.Expr] = ()) -> DeterminingSystem:
    kernels = POINT_KERNELS if kind == "point" else EQUIV_KERNELS
    equations: list[sp.Expr] = []
    log: list[tuple[str, sp.Expr, sp.Expr]] = []
    sources = [("invariance", residual)]
    sources += [(f"auxiliary{i}", r) for i, r in enumerate(auxiliary)]
    for label, r in sources:
        for mono, coeff in sorted(S.collect(r, kernels).items(),
                                  key=lambda kv: sp.default_sort_key(kv[0])):
            eq = _primitive(coeff)
            log.append((label, mono, eq))
            if eq != 0 and not any(sp.expand(eq - q) == 0 or sp.expand(eq + q) == 0
                                   for q in equations):
                equations.append(eq)
    return DeterminingSystem(kind, _unknowns(kind), equations, log)


def determining_system(kind: KindName) -> DeterminingSystem:
    Y = generic_field(kind)
    aux = auxiliary_residuals(Y) if kind == "equivalence" else ()
    return split_determining(invariance_residual(Y, kind), kind, aux)


# ---------------------------------------------------------------- ansatz

# Components eliminated first within each degree; with this order the free
# coefficients are exactly those of the translations and of x d_x, u d_u, E d_E.
ELIMINATION_ORDER = {"point": ("xi", "tau", "phi"),
                     "equivalence": ("xi", "eta", "tau", "phi", "chi")}


def _monomials(args: Sequence[sp.Symbol], degree: int) -> list[tuple[int, ...]]:
    out = []
    n = len(args)
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(n), d):
            exps = [0] * n
            for i in combo:
                exps[i] += 1
            out.append(tuple(exps))
    return out


def _linear_rows(exprs: Sequence[sp.Expr], cols: Sequence[sp.Symbol]) -> list[list[Fraction]]:
    index = {c: i for i, c in enumerate(cols)}
    rows: dict[sp.Expr, list[Fraction]] = {}
    for e in exprs:
        for term in sp.Add.make_args(sp.expand(e)):
            if term == 0:
                continue
            hit = [f for f in sp.Mul.make_args(term) if f in index]
            if len(hit) != 1:
                raise ValueError(f"ansatz equation not linear in coefficients: {term}")
            c = hit[0]
            rest = term / c
            q, mono = rest.as_coeff_Mul()
            key = (id(e), mono)
            row = rows.setdefault(key, [Fraction(0)] * len(cols))
            row[index[c]] += Fraction(int(q.p), int(q.q))
    return [r for r in rows.values() if any(r)]


def solve_polynomial_ansatz(system: DeterminingSystem, degree: int = 2) -> AnsatzSolution:
    if not system.equations:
        raise EmptySystem("determining system has no equations")
    if degree < 0:
        raise ValueError("degree must be non-negative")
    names = [str(f.func) for f in system.unknowns]
    order_names = ELIMINATION_ORDER[system.kind]
    cols: list[sp.Symbol] = []
    meta: list[tuple[int, int, tuple[int, ...]]] = []  # (unknown index, degree, exps)
    ansatz: dict[sp.Expr, sp.Expr] = {}
    for k, fn in enumerate(system.unknowns):
        args = fn.args
        poly = []
        for exps in _monomials(args, degree):
            c = sp.Symbol(f"k_{names[k]}_{''.join(map(str, exps))}")
            cols.append(c)
            meta.append((k, sum(exps), exps))
            poly.append(c * sp.Mul(*(a ** e for a, e in zip(args, exps))))
        ansatz[fn] = sp.Add(*poly)
    substituted = []
    for eq in system.equations:
        substituted.append(sp.expand(eq.subs(ansatz).doit()))
    rows = _linear_rows(substituted, cols)
    rank_order = {n: i for i, n in enumerate(order_names)}
    order = sorted(range(len(cols)), key=lambda i: (
        -meta[i][1], rank_order[names[meta[i][0]]], tuple(-e for e in meta[i][2])))
    null = linalg.nullspace(rows, len(cols), order) if rows else linalg.identity(len(cols))
    coords = POINT_COORDS if system.kind == "point" else EQUIV_COORDS
    basis = []
    for vec in null:
        comps = [sp.S.Zero] * len(system.unknowns)
        for i, q in enumerate(vec):
            if q:
                k, _, exps = meta[i]
                args = system.unknowns[k].args
                comps[k] += sp.Rational(q.numerator, q.denominator) * sp.Mul(
                    *(a ** e for a, e in zip(args, exps)))
        basis.append(VectorField(coords, dict(zip(coords, comps))))
    rk = len(cols) - len(null)
    return AnsatzSolution(basis, degree, (rk, len(cols)))


# ---------------------------------------------------------------- verification

def _diff_xu(form, ix, iu):
    d = form
    for _ in range(ix):
        d = sp.diff(d, x)
    for _ in range(iu):
        d = sp.diff(d, u)
    return d


def verify_generator(Y: VectorField, kind: KindName = "point", *, E_form=None,
                     H_form=None) -> Valid | Invalid:
    """Exact invariance check; with E/H forms bound, identically in Phi, Psi."""
    if kind == "equivalence":
        parts = [invariance_residual(Y, kind)] + auxiliary_residuals(Y)
        for p in parts:
            if sp.expand(p) != 0:
                return Invalid(p)
        return Valid()
    residual = invariance_residual(Y, "point")
    if E_form is None and H_form is None:
        return Valid() if sp.expand(residual) == 0 else Invalid(residual)
    bindings = {}
    for base, form in (("E", E_form), ("H", H_form)):
        if form is None:
            continue
        form = sp.sympify(form)
        for ix in range(3):
            for iu in range(3 - ix):
                bindings[formal(base, (0, ix, iu))] = _diff_xu(form, ix, iu)
    bound = residual.xreplace(bindings)
    for coeff in S.collect(bound, POINT_KERNELS).values():
        if not S.vanishes(coeff):
            return Invalid(bound)
    return Valid()
