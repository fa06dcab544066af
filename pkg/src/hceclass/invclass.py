"""Invariants of projected generators and the invariant equation families.

Every coefficient of a projected generator Z on (x, u, E, H) is zero, a
constant, a constant times its own coordinate, or affine in it.  Each
non-zero coordinate zeta then has a coordinate l(zeta) with Z l = 1, and
differences of these are invariants.  Invariants are kept in ln-linear form
on the chart x, u, E, H > 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import sympy as sp

from . import symexpr as S
from .detsys import Invalid, Valid, verify_generator
from .jetcalc import POINT_COORDS, VectorField, point_field
from .liealg import UnsupportedCoefficientShape, canonical_basis, printed_basis
from .optsys import (PROJECTED_COORDS, REPRESENTATIVES, Z_OF_A, a_indices_of, point_part, project,
                     sign_instances)
from .symexpr import E, H, Kind, kind_of, t, u, x


# ---------------------------------------------------------------- shapes

@dataclass(frozen=True)
class CoordODE:
    """d(zeta)/ds = a*zeta + b for one coordinate."""

    coord: sp.Symbol
    shape: str  # Zero, Translation, Scaling or Affine
    a: sp.Expr = sp.S.Zero
    b: sp.Expr = sp.S.Zero

    @property
    def c(self) -> sp.Expr:
        return self.b

    @property
    def k(self) -> sp.Expr:
        return self.a

    def ell(self) -> sp.Expr:
        """A function l(zeta) with (a*zeta + b) l'(zeta) = 1."""
        z = self.coord
        if self.shape == "Translation":
            return z / self.b
        if self.shape == "Scaling":
            return sp.log(z) / self.a
        if self.shape == "Affine":
            return sp.log(self.a * z + self.b) / self.a
        raise ValueError("a Zero coordinate has no l-coordinate")

    def solve_ell(self, value: sp.Expr) -> sp.Expr:
        """zeta with l(zeta) = value."""
        if self.shape == "Translation":
            return self.b * value
        if self.shape == "Scaling":
            return sp.exp(self.a * value)
        if self.shape == "Affine":
            return (sp.exp(self.a * value) - self.b) / self.a
        raise ValueError("a Zero coordinate has no l-coordinate")

    def __str__(self):
        from .formatting import to_string
        if self.shape == "Zero":
            return f"{self.coord}:Zero"
        if self.shape == "Translation":
            return f"{self.coord}:Translation({to_string(self.b)})"
        if self.shape == "Scaling":
            return f"{self.coord}:Scaling({to_string(self.a)})"
        return f"{self.coord}:Affine({to_string(self.a)}, {to_string(self.b)})"


def _is_constant(e: sp.Expr) -> bool:
    return all(kind_of(z) == Kind.PARAMETER for z in e.free_symbols)


def classify_coordinates(Z: VectorField) -> list[CoordODE]:
    out = []
    for c in PROJECTED_COORDS:
        v = sp.expand(Z[c])
        a = sp.expand(sp.diff(v, c))
        b = sp.expand(v - a * c)
        if not (_is_constant(a) and _is_constant(b)):
            raise UnsupportedCoefficientShape(f"coefficient {v} of d_{c}")
        if a == 0 and b == 0:
            out.append(CoordODE(c, "Zero"))
        elif a == 0:
            out.append(CoordODE(c, "Translation", sp.S.Zero, b))
        elif b == 0:
            out.append(CoordODE(c, "Scaling", a, sp.S.Zero))
        else:
            out.append(CoordODE(c, "Affine", a, b))
    return out


# ---------------------------------------------------------------- invariants

@dataclass(frozen=True)
class InvariantSet:
    Z: VectorField
    shapes: tuple
    I1: sp.Expr
    I2: sp.Expr
    I3: sp.Expr
    lam: sp.Expr | None
    pivot: sp.Symbol | None

    def display(self) -> tuple[sp.Expr, sp.Expr, sp.Expr]:
        return tuple(_display(I) for I in (self.I1, self.I2, self.I3))

    def as_list(self) -> list[sp.Expr]:
        return [self.I1, self.I2, self.I3]


def _display(I: sp.Expr) -> sp.Expr:
    if I.has(sp.log):
        return sp.powsimp(sp.expand_log(sp.exp(I), force=True), force=True)
    return I


def invariants_of(Z: VectorField) -> InvariantSet:
    shapes = classify_coordinates(Z)
    sx, su, sE, sH = shapes
    if all(s_.shape == "Zero" for s_ in shapes):
        raise ValueError("the zero field has no invariant set")

    def rel(s_, piv):
        return s_.coord if s_.shape == "Zero" else S.normalize(s_.ell() - piv)

    if sx.shape == "Zero" and su.shape == "Zero":
        if sE.shape != "Zero" and sH.shape != "Zero":
            I3 = S.normalize(sH.ell() - sE.ell())
        else:
            I3 = E if sE.shape == "Zero" else H
        return InvariantSet(Z, tuple(shapes), x, u, I3, None, None)
    if sx.shape == "Zero":
        lam, pivot = x, su
    elif su.shape == "Zero":
        lam, pivot = u, sx
    else:
        lam, pivot = S.normalize(su.ell() - sx.ell()), su
    lp = pivot.ell()
    return InvariantSet(Z, tuple(shapes), lam, rel(sE, lp), rel(sH, lp), lam, pivot.coord)


def annihilates(Z: VectorField, I: sp.Expr) -> bool:
    return S.vanishes(Z(I))


def jacobian_rank(inv: InvariantSet, point: dict | None = None) -> int:
    point = point or {x: sp.Rational(3, 7), u: sp.Rational(5, 2), E: sp.Rational(7, 3),
                      H: sp.Rational(11, 5)}
    rows = []
    for I in inv.as_list():
        row = [sp.diff(I, c) for c in PROJECTED_COORDS]
        rows.append(row)
    M = sp.Matrix(rows)
    params = {z: sp.Rational(13 + 2 * i, 17) for i, z in enumerate(sorted(M.free_symbols - set(point), key=str))}
    return M.subs({**point, **params}).rank()


# ---------------------------------------------------------------- families

@dataclass(frozen=True)
class Family:
    E_form: sp.Expr
    H_form: sp.Expr
    lam: sp.Expr


@dataclass(frozen=True)
class NoInvariantEquation:
    reason: str = "the (x, u)-components of the generator vanish"

    def __bool__(self):
        return False


def reconstruct_equation(inv: InvariantSet) -> Family | NoInvariantEquation:
    if inv.lam is None:
        return NoInvariantEquation()
    sx, su, sE, sH = inv.shapes
    pivot = su if inv.pivot == u else sx
    lp = pivot.ell()

    def form(s_, fn):
        arb = fn(inv.lam)
        if s_.shape == "Zero":
            return arb
        return S.normalize(s_.solve_ell(arb + lp))

    return Family(form(sE, S.Phi), form(sH, S.Psi), inv.lam)


def form_invariant(Z: VectorField, coord: sp.Symbol, F: sp.Expr) -> bool:
    """The surface coord = F(x, u) is mapped to itself by Z."""
    expr = Z[coord].subs(coord, F) - Z[x] * sp.diff(F, x) - Z[u] * sp.diff(F, u)
    return S.vanishes(expr)


# ---------------------------------------------------------------- operators

BASES = {"canonical": canonical_basis, "printed": printed_basis}


def _basis(realization: str):
    try:
        return BASES[realization]()
    except KeyError:
        raise ValueError(f"unknown realization {realization!r}") from None


def additional_operator(i: int, realization: str = "canonical",
                        params: dict | None = None) -> list[VectorField]:
    """(t, x, u)-parts of every representative that shares its projection with A^i."""
    basis = _basis(realization)
    z = Z_OF_A.get(i)
    group = a_indices_of(z) if z is not None else [i]
    out = []
    for j in group:
        rep = REPRESENTATIVES[j]
        for sg in sign_instances(rep):
            X = point_part(rep.field(sg, params, basis))
            if not any(X.equals(Y) for Y in out):
                out.append(X)
    return out


def canonical_operator(X: VectorField) -> VectorField:
    """Fix the free scale by the rational content of the first nonzero coefficient among u, x, t."""
    for c in (u, x, t):
        v = sp.expand(X[c])
        if v == 0:
            continue
        q, _ = sp.factor_terms(v).as_coeff_Mul()
        if q.is_Rational and q != 0:
            return X.scaled(1 / q).expanded()
        return X.expanded()
    return X


def canonical_invariant(lam: sp.Expr) -> sp.Expr:
    """Fix the free rational factor of an invariant by its u-part, else its x-part."""
    lam = S.normalize(lam)
    for c in (u, x):
        terms = [a for a in sp.Add.make_args(lam) if a.has(c)]
        if len(terms) == 1:
            q, _ = terms[0].as_coeff_Mul()
            if q != 0:
                return S.normalize(lam / q)
        if terms:
            return lam
    return lam


# ---------------------------------------------------------------- classification

@dataclass
class ClassificationEntry:
    row: int
    z: int
    a_indices: list[int]
    signs: tuple[int, ...]
    regime: dict  # parameter -> exact value
    Z: VectorField
    invariants: InvariantSet | None
    family: Family | NoInvariantEquation
    operators: list[VectorField]
    verified: bool
    printed_row: int | None = None
    note: str = ""

    @property
    def lam(self):
        return self.family.lam if isinstance(self.family, Family) else None


def z_field(z: int, signs: Sequence[int] = (), params: dict | None = None,
            realization: str = "canonical") -> VectorField:
    primary = REPRESENTATIVES[a_indices_of(z)[0]]
    return project(primary.field(signs, params, _basis(realization)))


def operators_for(z: int, signs: Sequence[int] = (), params: dict | None = None,
                  realization: str = "canonical") -> list[VectorField]:
    """(t, x, u)-parts of all representatives projecting to this instance of Z."""
    basis = _basis(realization)
    target = z_field(z, signs, params, realization)
    out = []
    for j in a_indices_of(z):
        rep = REPRESENTATIVES[j]
        for sg in sign_instances(rep):
            full = rep.field(sg, params, basis)
            if project(full).equals(target):
                X = point_part(full)
                if not any(X.equals(Y) for Y in out):
                    out.append(X)
    return out


def verify_family(family: Family, operators: Sequence[VectorField]) -> bool:
    ops = [point_field(1, 0, 0)] + list(operators)
    return all(bool(verify_generator(X, "point", E_form=family.E_form, H_form=family.H_form))
               for X in ops)


def _critical_expressions(Z: VectorField) -> list[sp.Expr]:
    out = []
    for s_ in classify_coordinates(Z):
        for v in (s_.a, s_.b):
            if v != 0 and v.free_symbols:
                out.append(v)
    return out


def detect_regimes(Z: VectorField) -> list[dict]:
    """Generic regime first, then every consistent choice of vanishing coefficients.

    A regime binds some parameters to rationals or to expressions in the
    parameters it leaves free; later parameters are solved for first.
    """
    crit = _critical_expressions(Z)
    params = sorted(set().union(*(e.free_symbols for e in crit)) if crit else set(), key=str)
    regimes: list[dict] = [{}]
    for r in range(1, len(params) + 1):
        for subset in itertools.combinations(crit, r):
            for unknowns in itertools.combinations(params[::-1], r):
                sol = sp.solve(list(subset), list(unknowns), dict=True)
                sol = [s_ for s_ in sol if len(s_) == r
                       and not any(v == 0 or v.free_symbols & set(unknowns) for v in s_.values())]
                if sol:
                    break
            for s_ in sol:
                s_ = {k: sp.nsimplify(v) if v.is_number else sp.expand(v) for k, v in s_.items()}
                if s_ not in regimes:
                    regimes.append(s_)
    return regimes


def classify_z(z: int, realization: str = "canonical",
               params: dict | None = None) -> list[ClassificationEntry]:
    """Classification rows of one projection; `params` binds alpha/beta to values."""
    primary = REPRESENTATIVES[a_indices_of(z)[0]]
    out = []
    for sg in sign_instances(primary):
        Zg = z_field(z, sg, params, realization)
        for regime in detect_regimes(Zg):
            Z = Zg.subs(regime).expanded()
            if Z.is_zero():
                continue
            inv = invariants_of(Z)
            fam = reconstruct_equation(inv)
            ops = [X.subs(regime).expanded() for X in operators_for(z, sg, params, realization)]
            ok = verify_family(fam, ops) if isinstance(fam, Family) else True
            out.append(ClassificationEntry(0, z, a_indices_of(z), sg, regime, Z, inv, fam, ops, ok))
    return out


def classify_all(realization: str = "canonical", params: dict | None = None) -> list[ClassificationEntry]:
    rows = []
    for z in range(1, 24):
        rows.extend(classify_z(z, realization, params))
    for i, r in enumerate(rows, 1):
        r.row = i
    return rows
