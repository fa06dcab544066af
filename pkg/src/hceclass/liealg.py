"""The six-dimensional equivalence algebra: brackets, structure constants,
Killing form, derived series, exact adjoint actions, flows and the induced
maps on solutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import sympy as sp

from . import linalg
from . import symexpr as S
from .jetcalc import EQUIV_COORDS, VectorField, equivalence_field
from .symexpr import E, H, s, t, u, x

NAMES = ("Y1", "Y2", "Y3", "Y4", "Y5", "Y6")


class NotClosed(ValueError):
    """A bracket falls outside the span of the basis."""


class NonRationalSpectrum(ValueError):
    """A matrix has eigenvalues outside the rationals."""


class UnsupportedCoefficientShape(ValueError):
    """A coefficient is neither constant nor rational times its own coordinate."""


def canonical_basis() -> list[VectorField]:
    return [
        equivalence_field(xi=1),
        equivalence_field(tau=1),
        equivalence_field(phi=1),
        equivalence_field(xi=2 * t, tau=x, eta=-2 * H),
        equivalence_field(xi=-t, chi=E, eta=H),
        equivalence_field(phi=u, eta=H),
    ]


def printed_basis() -> list[VectorField]:
    """Basis with the fourth generator as 2t d_t + d_x - 2H d_H.

    That field is not an equivalence generator; it is kept only to explain
    tables computed from it.
    """
    b = canonical_basis()
    b[3] = equivalence_field(xi=2 * t, tau=1, eta=-2 * H)
    return b


def bracket(Y: VectorField, Z: VectorField) -> VectorField:
    coords = Y.coords if len(Y.coords) >= len(Z.coords) else Z.coords
    return VectorField(coords, {c: sp.expand(Y(Z[c]) - Z(Y[c])) for c in coords})


# ---------------------------------------------------------------- algebra

def _field_key_vector(fields: Sequence[VectorField]):
    """Coordinates of fields in a common monomial frame, for exact linear solves."""
    keys = []
    per = []
    for F in fields:
        d = {}
        for c in EQUIV_COORDS:
            for term in sp.Add.make_args(sp.expand(F[c])):
                if term == 0:
                    continue
                q, mono = term.as_coeff_Mul()
                d[(c, mono)] = d.get((c, mono), 0) + q
        per.append(d)
        for k in d:
            if k not in keys:
                keys.append(k)
    return keys, per


def coordinates_in(basis: Sequence[VectorField], F: VectorField) -> list[Fraction]:
    keys, per = _field_key_vector(list(basis) + [F])
    cols = [[Fraction(int(sp.Rational(d.get(k, 0)).p), int(sp.Rational(d.get(k, 0)).q))
             for d in per] for k in keys]
    A = [row[:-1] for row in cols]
    b = [row[-1] for row in cols]
    y = linalg.solve(A, b) if A else [Fraction(0)] * len(basis)
    if y is None:
        raise NotClosed(f"{F} is not in the span of the basis")
    return y


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    structure: tuple  # structure[i][j] = coefficient vector of [e_i, e_j]
    fields: tuple | None = None
    names: tuple = NAMES

    @property
    def dim(self) -> int:
        return len(self.structure)

    @classmethod
    def from_fields(cls, fields: Sequence[VectorField], names: Sequence[str] | None = None):
        n = len(fields)
        table = []
        for i in range(n):
            row = []
            for j in range(n):
                row.append(tuple(coordinates_in(fields, bracket(fields[i], fields[j]))))
            table.append(tuple(row))
        return cls(tuple(table), tuple(fields), tuple(names or NAMES[:n]))

    @classmethod
    def from_structure(cls, table, names: Sequence[str] | None = None):
        n = len(table)
        t_ = tuple(tuple(tuple(Fraction(v) for v in table[i][j]) for j in range(n)) for i in range(n))
        return cls(t_, None, tuple(names or [f"e{i + 1}" for i in range(n)]))

    def bracket_vec(self, a: Sequence, b: Sequence) -> list[Fraction]:
        out = [Fraction(0)] * self.dim
        for i, j in product(range(self.dim), repeat=2):
            if a[i] and b[j]:
                for k, c in enumerate(self.structure[i][j]):
                    out[k] += Fraction(a[i]) * Fraction(b[j]) * c
        return out

    def ad(self, v: Sequence) -> linalg.Matrix:
        """Matrix of ad(v) acting on coefficient column vectors."""
        cols = [self.bracket_vec(v, unit(self.dim, j)) for j in range(self.dim)]
        return [[cols[j][k] for j in range(self.dim)] for k in range(self.dim)]


def unit(n: int, i: int) -> list[Fraction]:
    return [Fraction(int(k == i)) for k in range(n)]


@lru_cache(maxsize=None)
def canonical_algebra() -> LieAlgebra:
    return LieAlgebra.from_fields(canonical_basis())


def structure_table(alg: LieAlgebra | None = None) -> list[list[list[Fraction]]]:
    alg = alg or canonical_algebra()
    return [[list(alg.structure[i][j]) for j in range(alg.dim)] for i in range(alg.dim)]


def killing_form(v: Sequence, w: Sequence, alg: LieAlgebra | None = None) -> Fraction:
    alg = alg or canonical_algebra()
    return linalg.trace(linalg.matmul(alg.ad(v), alg.ad(w)))


def killing_closed_form(a: Sequence, b: Sequence) -> Fraction:
    a = [Fraction(v) for v in a]
    b = [Fraction(v) for v in b]
    return 5 * a[3] * b[3] - 2 * (a[3] * b[4] + a[4] * b[3]) + a[4] * b[4] + a[5] * b[5]


def killing_matrix(alg: LieAlgebra | None = None) -> linalg.Matrix:
    alg = alg or canonical_algebra()
    n = alg.dim
    return [[killing_form(unit(n, i), unit(n, j), alg) for j in range(n)] for i in range(n)]


def derived_series(alg: LieAlgebra | None = None) -> list[list[list[Fraction]]]:
    """[L^(1), L^(2), ...] as reduced bases, ending with the first zero or stable term."""
    alg = alg or canonical_algebra()
    current = linalg.identity(alg.dim)
    series = []
    while True:
        spans = [alg.bracket_vec(a, b) for a in current for b in current]
        reduced, _ = linalg.echelon(spans, alg.dim) if spans else ([], [])
        series.append(reduced)
        if not reduced or len(reduced) == len(current):
            return series
        current = reduced


# ---------------------------------------------------------------- ExpPoly

class ExpPoly:
    """Exact scalar sum of q * s^k * exp(lam * s) with rational q, lam."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for (k, lam), q in (terms or {}).items():
            q = Fraction(q)
            if q:
                key = (int(k), Fraction(lam))
                clean[key] = clean.get(key, Fraction(0)) + q
        self.terms = {k: v for k, v in clean.items() if v}

    @classmethod
    def const(cls, q) -> "ExpPoly":
        return cls({(0, 0): q})

    @classmethod
    def from_triples(cls, triples) -> "ExpPoly":
        out = {}
        for q, k, lam in triples:
            out[(k, lam)] = out.get((k, lam), 0) + Fraction(q)
        return cls(out)

    def triples(self) -> list[tuple[Fraction, int, Fraction]]:
        return [(q, k, lam) for (k, lam), q in sorted(self.terms.items())]

    def __add__(self, other):
        other = other if isinstance(other, ExpPoly) else ExpPoly.const(other)
        d = dict(self.terms)
        for k, v in other.terms.items():
            d[k] = d.get(k, 0) + v
        return ExpPoly(d)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, ExpPoly) else ExpPoly.const(-Fraction(other)))

    def __mul__(self, other):
        if not isinstance(other, ExpPoly):
            return ExpPoly({k: v * Fraction(other) for k, v in self.terms.items()})
        d = {}
        for (k1, l1), q1 in self.terms.items():
            for (k2, l2), q2 in other.terms.items():
                key = (k1 + k2, l1 + l2)
                d[key] = d.get(key, 0) + q1 * q2
        return ExpPoly(d)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ExpPoly):
            other = ExpPoly.const(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def derivative(self) -> "ExpPoly":
        d = {}
        for (k, lam), q in self.terms.items():
            if k:
                d[(k - 1, lam)] = d.get((k - 1, lam), 0) + q * k
            if lam:
                d[(k, lam)] = d.get((k, lam), 0) + q * lam
        return ExpPoly(d)

    def at_zero(self) -> Fraction:
        return sum((q for (k, _), q in self.terms.items() if k == 0), Fraction(0))

    def to_sympy(self, var: sp.Symbol = s) -> sp.Expr:
        return sp.Add(*(sp.Rational(q.numerator, q.denominator) * var ** k
                        * sp.exp(sp.Rational(lam.numerator, lam.denominator) * var)
                        for (k, lam), q in self.terms.items()))

    def __repr__(self):
        return f"ExpPoly({self.triples()})"

    def __str__(self):
        from .formatting import to_string
        return to_string(self.to_sympy())


def expoly_matmul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    return [[sum((A[i][k] * B[k][j] for k in range(m)), ExpPoly()) for j in range(p)]
            for i in range(n)]


def _rational_eigenvalues(M: linalg.Matrix) -> dict[Fraction, int]:
    n = len(M)
    lam = sp.Symbol("lam")
    cp = sp.Matrix(n, n, lambda i, j: sp.Rational(M[i][j].numerator, M[i][j].denominator)).charpoly(lam)
    roots = sp.roots(cp.as_expr(), lam)
    if sum(roots.values()) != n or any(not r.is_Rational for r in roots):
        raise NonRationalSpectrum(f"characteristic polynomial {cp.as_expr()} has non-rational roots")
    return {Fraction(int(r.p), int(r.q)): m for r, m in sorted(roots.items(), key=lambda kv: kv[0])}


def jordan_chevalley(M: Sequence[Sequence]) -> tuple[linalg.Matrix, linalg.Matrix, dict]:
    """Return (S, N, projections) with M = S + N, S semisimple, N nilpotent, SN = NS.

    projections maps each eigenvalue to the spectral projection onto its
    generalized eigenspace.
    """
    M = [[Fraction(v) for v in r] for r in M]
    n = len(M)
    eig = _rational_eigenvalues(M)
    columns = []
    blocks = []
    for lam, mult in eig.items():
        shifted = linalg.matsub(M, linalg.scale(linalg.identity(n), lam))
        power = linalg.identity(n)
        for _ in range(mult):
            power = linalg.matmul(power, shifted)
        space = linalg.nullspace(power, n)
        if len(space) != mult:
            raise NonRationalSpectrum("generalized eigenspace has wrong dimension")
        blocks.append((lam, len(columns), len(columns) + mult))
        columns.extend(space)
    T = [[columns[j][i] for j in range(n)] for i in range(n)]
    Tinv = linalg.inverse(T)
    projections = {}
    Smat = [[Fraction(0)] * n for _ in range(n)]
    for lam, a, b in blocks:
        D = [[Fraction(int(i == j and a <= i < b)) for j in range(n)] for i in range(n)]
        P = linalg.matmul(linalg.matmul(T, D), Tinv)
        projections[lam] = P
        Smat = [[Smat[i][j] + lam * P[i][j] for j in range(n)] for i in range(n)]
    N = linalg.matsub(M, Smat)
    return Smat, N, projections


def exp_matrix(M: Sequence[Sequence]) -> list[list[ExpPoly]]:
    """exp(s M) entrywise as ExpPoly, via the Jordan-Chevalley split."""
    M = [[Fraction(v) for v in r] for r in M]
    n = len(M)
    _, N, projections = jordan_chevalley(M)
    out = [[ExpPoly() for _ in range(n)] for _ in range(n)]
    powers = [linalg.identity(n)]
    while len(powers) <= n:
        powers.append(linalg.matmul(powers[-1], N))
    fact = Fraction(1)
    for k, Nk in enumerate(powers):
        if k:
            fact *= k
        if not any(any(r) for r in Nk):
            break
        for lam, P in projections.items():
            PN = linalg.matmul(P, Nk)
            for i in range(n):
                for j in range(n):
                    if PN[i][j]:
                        out[i][j] = out[i][j] + ExpPoly({(k, lam): PN[i][j] / fact})
    return out


@lru_cache(maxsize=None)
def _adjoint_matrix_cached(i: int, alg: LieAlgebra) -> tuple:
    M = linalg.scale(alg.ad(unit(alg.dim, i)), -1)
    return tuple(tuple(r) for r in exp_matrix(M))


def adjoint_matrix(i: int, alg: LieAlgebra | None = None) -> list[list[ExpPoly]]:
    """Matrix of Ad(exp(s Y_i)) = exp(-s ad Y_i) on coefficient columns (0-based i)."""
    alg = alg or canonical_algebra()
    return [list(r) for r in _adjoint_matrix_cached(i, alg)]


def adjoint_action(i: int, j: int, alg: LieAlgebra | None = None) -> list[ExpPoly]:
    """Coefficient vector of Ad(exp(s Y_i)) Y_j (0-based indices)."""
    A = adjoint_matrix(i, alg)
    return [A[k][j] for k in range(len(A))]


def adjoint_series(i: int, j: int, order: int, alg: LieAlgebra | None = None) -> list[sp.Expr]:
    """Truncated Lie series sum_k (-s)^k/k! ad(Y_i)^k Y_j, as sympy polynomials in s."""
    alg = alg or canonical_algebra()
    n = alg.dim
    term = unit(n, j)
    out = [sp.S.Zero] * n
    ei = unit(n, i)
    for k in range(order + 1):
        for m in range(n):
            out[m] += sp.Rational(term[m].numerator, term[m].denominator) * (-s) ** k / sp.factorial(k)
        term = alg.bracket_vec(ei, term)
    return out


# ---------------------------------------------------------------- flows

@dataclass(frozen=True)
class Flow:
    index: int | None
    maps: dict  # coordinate -> expression in coordinates and s

    def at(self, value) -> dict:
        return {c: sp.sympify(m).subs(s, value) for c, m in self.maps.items()}

    def apply(self, point: dict, value=s) -> dict:
        """Image of a point (dict coordinate -> expr) under the flow at parameter value."""
        images = self.at(value)
        return {c: images[c].xreplace(point) for c in self.maps}


def flow_of(Y: VectorField, index: int | None = None) -> Flow:
    maps = {}
    for c in EQUIV_COORDS:
        v = sp.expand(Y[c])
        if v == 0:
            maps[c] = c
        elif not v.free_symbols:
            maps[c] = c + v * s
        else:
            lam = sp.cancel(v / c)
            if not lam.is_Rational:
                raise UnsupportedCoefficientShape(f"coefficient {v} of {c}")
            maps[c] = c * sp.exp(lam * s)
    return Flow(index, maps)


def flow(i: int) -> Flow:
    """One-parameter group of the canonical generator Y_{i+1} (0-based i)."""
    return flow_of(canonical_basis()[i], i)


REFLECTIONS = {
    "t": Flow(None, {t: -t, x: x, u: u, E: E, H: H}),
    "u": Flow(None, {t: t, x: x, u: -u, E: E, H: H}),
    "E": Flow(None, {t: t, x: x, u: u, E: -E, H: H}),
    "H": Flow(None, {t: t, x: x, u: u, E: E, H: -H}),
}
# Not among the printed discrete maps, but also an equivalence transformation:
# (E u_x)_x is even in x, so x -> -x maps the class to itself.
EXTRA_REFLECTIONS = {"x": Flow(None, {t: t, x: -x, u: u, E: E, H: H})}


# ---------------------------------------------------------------- solutions

@dataclass(frozen=True)
class SolutionRule:
    index: int
    solution: sp.Expr          # new solution in t, x via the formal solution f
    E_bar: sp.Expr             # new conductivity as a function of x, u
    H_bar: sp.Expr             # new source as a function of x, u
    E_factor: sp.Expr          # value map E -> E_factor * E
    H_factor: sp.Expr          # value map H -> H_factor * H


def transform_solution(i: int, param=s) -> SolutionRule:
    """Solutions carried by the inverse flow G_{-s} of Y_{i+1}.

    If u = f(t, x) solves the equation with E, H, then the rule's solution
    solves it with E_bar, H_bar.  The inverse flow is the direction in which
    the solution maps read f(t + s, x), f(t e^{2s}, x e^s), and so on.
    """
    F = flow(i)
    fwd = F.at(param)
    back = F.at(-param)
    T, X, U = fwd[t], fwd[x], fwd[u]
    f = S.f_solution(T, X)
    solution = back[u].subs(u, f)
    E_factor = sp.simplify(back[E] / E)
    H_factor = sp.simplify(back[H] / H)
    E_bar = E_factor * S.E_of(X, U)
    H_bar = H_factor * S.H_of(X, U)
    return SolutionRule(i, solution, E_bar, H_bar, E_factor, H_factor)


def rule_residual(rule: SolutionRule) -> sp.Expr:
    """Residual of the rule's solution in the transformed equation, on solutions of the original."""
    w = sp.Symbol("w_")
    ub = rule.solution
    Eb = rule.E_bar.subs(u, w).subs(w, ub)
    Hb = rule.H_bar.subs(u, w).subs(w, ub)
    residual = sp.diff(ub, t) - sp.diff(Eb * sp.diff(ub, x), x) - Hb
    f_t_cls = S.formal_function("f", ("t", "x"), (1, 0))

    def rhs(app):
        a, b = app.args
        F = S.f_solution(a, b)
        Fx = S.formal_function("f", ("t", "x"), (0, 1))(a, b)
        Fxx = S.formal_function("f", ("t", "x"), (0, 2))(a, b)
        return (S.formal_function("E", ("x", "u"), (1, 0))(b, F) * Fx
                + S.formal_function("E", ("x", "u"), (0, 1))(b, F) * Fx ** 2
                + S.E_of(b, F) * Fxx + S.H_of(b, F))

    residual = residual.replace(lambda z: isinstance(z, f_t_cls), rhs)
    return sp.expand(sp.powsimp(sp.expand(residual), combine="exp"))


def verify_rule(rule: SolutionRule) -> bool:
    return S.vanishes(rule_residual(rule))
