"""Total derivatives and second prolongations on the jet space.

Point generators live on (t, x, u); equivalence generators live on
(t, x, u, E, H) with E and H treated as differential variables over
(t, x, u).  The default prolongation iterates the first-order rule; the
characteristic form is kept as an independent route for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import sympy as sp

from . import symexpr as S
from .symexpr import E, H, Kind, t, u, x, jet, formal, symbol_info

POINT_COORDS = (t, x, u)
EQUIV_COORDS = (t, x, u, E, H)
MAX_ORDER = 2


class JetOrderOverflow(ValueError):
    """A derivative would leave the order-2 jet space."""


class CoefficientDependenceError(ValueError):
    """A generator coefficient depends on variables it may not depend on."""


@dataclass(frozen=True)
class VectorField:
    coords: tuple[sp.Symbol, ...]
    coeffs: Mapping[sp.Symbol, sp.Expr] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for c, v in dict(self.coeffs).items():
            if c not in self.coords:
                raise ValueError(f"{c} is not a coordinate of this field")
            v = sp.sympify(v)
            if v != 0:
                clean[c] = v
        object.__setattr__(self, "coeffs", clean)

    def __getitem__(self, c: sp.Symbol) -> sp.Expr:
        return self.coeffs.get(c, sp.S.Zero)

    def __call__(self, f) -> sp.Expr:
        """Apply the field as a derivation to a function of its coordinates."""
        f = sp.sympify(f)
        return sp.Add(*(v * sp.diff(f, c) for c, v in self.coeffs.items()))

    def __add__(self, other: "VectorField") -> "VectorField":
        coords = self.coords if len(self.coords) >= len(other.coords) else other.coords
        return VectorField(coords, {c: self[c] + other[c] for c in coords})

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scaled(-1)

    def scaled(self, q) -> "VectorField":
        return VectorField(self.coords, {c: q * v for c, v in self.coeffs.items()})

    __rmul__ = lambda self, q: self.scaled(q)

    def expanded(self) -> "VectorField":
        return VectorField(self.coords, {c: sp.expand(v) for c, v in self.coeffs.items()})

    def equals(self, other: "VectorField") -> bool:
        coords = set(self.coords) | set(other.coords)
        return all(sp.expand(self[c] - other[c]) == 0 for c in coords)

    def is_zero(self) -> bool:
        return all(sp.expand(v) == 0 for v in self.coeffs.values())

    def restrict(self, coords: tuple[sp.Symbol, ...]) -> "VectorField":
        return VectorField(coords, {c: self[c] for c in coords})

    def subs(self, bindings) -> "VectorField":
        return VectorField(self.coords, {c: sp.sympify(v).subs(bindings)
                                         for c, v in self.coeffs.items()})

    def __repr__(self) -> str:
        body = " + ".join(f"({v})*d_{c}" for c, v in self.coeffs.items()) or "0"
        return f"VectorField[{body}]"


def point_field(xi=0, tau=0, phi=0) -> VectorField:
    return VectorField(POINT_COORDS, {t: xi, x: tau, u: phi})


def equivalence_field(xi=0, tau=0, phi=0, chi=0, eta=0) -> VectorField:
    return VectorField(EQUIV_COORDS, {t: xi, x: tau, u: phi, E: chi, H: eta})


def _allowed_symbols(expr: sp.Expr, allowed: set) -> bool:
    for sym in expr.free_symbols:
        if sym in allowed:
            continue
        if symbol_info(sym) is not None and symbol_info(sym).kind == Kind.PARAMETER:
            continue
        if symbol_info(sym) is None and not isinstance(sym, sp.Dummy):
            # Unregistered symbols act as constants (ansatz coefficients).
            continue
        return False
    return True


def check_point(Y: VectorField) -> None:
    for c in POINT_COORDS:
        if not _allowed_symbols(Y[c], set(POINT_COORDS)):
            raise CoefficientDependenceError(f"coefficient of {c} must depend on t, x, u only")
    for c in Y.coeffs:
        if c not in POINT_COORDS:
            raise CoefficientDependenceError(f"{c} is not a point coordinate")


def check_equivalence(Y: VectorField) -> None:
    for c in POINT_COORDS:
        if not _allowed_symbols(Y[c], set(POINT_COORDS)):
            raise CoefficientDependenceError(f"coefficient of {c} must depend on t, x, u only")
    for c in (E, H):
        if not _allowed_symbols(Y[c], set(EQUIV_COORDS)):
            raise CoefficientDependenceError(f"coefficient of {c} must depend on t, x, u, E, H")


# ---------------------------------------------------------------- derivatives

def total_derivative(e, v: sp.Symbol, *, max_order: int = MAX_ORDER,
                     formal_t: bool = False) -> sp.Expr:
    """D_v e for v in {t, x}.

    E and H kernels are functions of (x, u); with formal_t they also depend on
    t and contribute E_t, H_t terms.
    """
    if v not in (t, x):
        raise ValueError("total derivatives are taken in t or x")
    axis = 0 if v == t else 1
    e = sp.sympify(e)
    # E(x,u)-style applications are rewritten as flat symbols first.
    e = S.to_jet(e)
    out = [sp.diff(e, v)]
    for sym in e.free_symbols:
        info = symbol_info(sym)
        if info is None:
            continue
        if info.base == "u":
            d = sp.diff(e, sym)
            if d == 0:
                continue
            nt, nx = info.index
            idx = (nt + 1, nx) if axis == 0 else (nt, nx + 1)
            if sum(idx) > max_order:
                raise JetOrderOverflow(f"D_{v} of {sym} exceeds jet order {max_order}")
            out.append(jet(idx) * d)
        elif info.kind == Kind.FORMAL_DERIVATIVE:
            d = sp.diff(e, sym)
            if d == 0:
                continue
            it, ix, iu = info.index
            if it + ix + iu + 1 > MAX_ORDER:
                raise JetOrderOverflow(f"D_{v} of {sym} exceeds order {MAX_ORDER}")
            if axis == 1:
                out.append(formal(info.base, (it, ix + 1, iu)) * d)
            elif formal_t:
                out.append(formal(info.base, (it + 1, ix, iu)) * d)
            out.append(formal(info.base, (it, ix, iu + 1)) * jet((1, 0) if axis == 0 else (0, 1)) * d)
    return sp.Add(*out)


def extended_total_derivative(e, I: sp.Symbol) -> sp.Expr:
    """D~_I = d/dI + sum over formal partials E_K of E_{K+I} d/dE_K (same for H)."""
    if I not in (t, x, u):
        raise ValueError("extended total derivatives are taken in t, x or u")
    axis = (t, x, u).index(I)
    e = sp.sympify(e)
    out = [sp.diff(e, I)]
    for sym in e.free_symbols:
        info = symbol_info(sym)
        if info is None or info.kind != Kind.FORMAL_DERIVATIVE:
            continue
        d = sp.diff(e, sym)
        if d == 0:
            continue
        idx = list(info.index)
        idx[axis] += 1
        if sum(idx) > MAX_ORDER:
            raise JetOrderOverflow(f"D~_{I} of {sym} exceeds order {MAX_ORDER}")
        out.append(formal(info.base, tuple(idx)) * d)
    return sp.Add(*out)


def characteristic(Y: VectorField) -> sp.Expr:
    return Y[u] - Y[t] * jet((1, 0)) - Y[x] * jet((0, 1))


# ---------------------------------------------------------------- prolongation

@dataclass(frozen=True)
class ProlongedField:
    base: VectorField
    jet_coeffs: Mapping[sp.Symbol, sp.Expr]

    def __getitem__(self, c: sp.Symbol) -> sp.Expr:
        if c in self.base.coords:
            return self.base[c]
        return self.jet_coeffs.get(c, sp.S.Zero)

    def __call__(self, f) -> sp.Expr:
        f = sp.sympify(f)
        parts = [self.base(f)]
        parts += [v * sp.diff(f, c) for c, v in self.jet_coeffs.items()]
        return sp.Add(*parts)


_FIRST = ((1, 0), (0, 1))
_SECOND = ((2, 0), (1, 1), (0, 2))


def _first_order(Y: VectorField, v: sp.Symbol, coeff_u, prefix: tuple[int, int]) -> sp.Expr:
    """D_v(coeff) - u_{prefix,t} D_v(xi) - u_{prefix,x} D_v(tau)."""
    xi, tau = Y[t], Y[x]
    ut = jet((prefix[0] + 1, prefix[1]))
    ux = jet((prefix[0], prefix[1] + 1))
    return (total_derivative(coeff_u, v) - ut * total_derivative(xi, v)
            - ux * total_derivative(tau, v))


def prolong2(Y: VectorField) -> ProlongedField:
    """Second prolongation by iterating the first-order rule."""
    check_point(Y.restrict(POINT_COORDS)) if set(Y.coords) == set(POINT_COORDS) else None
    phi = Y[u]
    ph_t = sp.expand(_first_order(Y, t, phi, (0, 0)))
    ph_x = sp.expand(_first_order(Y, x, phi, (0, 0)))
    ph_tt = sp.expand(_first_order(Y, t, ph_t, (1, 0)))
    ph_tx = sp.expand(_first_order(Y, x, ph_t, (1, 0)))
    ph_xx = sp.expand(_first_order(Y, x, ph_x, (0, 1)))
    coeffs = {jet((1, 0)): ph_t, jet((0, 1)): ph_x, jet((2, 0)): ph_tt,
              jet((1, 1)): ph_tx, jet((0, 2)): ph_xx}
    return ProlongedField(Y, coeffs)


def prolong2_characteristic(Y: VectorField) -> ProlongedField:
    """Second prolongation from phi^J = D_J(Q) + xi u_{J,t} + tau u_{J,x}.

    Third-order jets appear in D_J(Q) and must cancel; this route is an
    independent check of prolong2.
    """
    Q = characteristic(Y)
    xi, tau = Y[t], Y[x]
    coeffs = {}
    for J in _FIRST + _SECOND:
        d = Q
        for _ in range(J[0]):
            d = total_derivative(d, t, max_order=3)
        for _ in range(J[1]):
            d = total_derivative(d, x, max_order=3)
        val = sp.expand(d + xi * jet((J[0] + 1, J[1])) + tau * jet((J[0], J[1] + 1)))
        for sym in val.free_symbols:
            info = symbol_info(sym)
            if info is not None and info.kind == Kind.JET and info.order > 2:
                raise JetOrderOverflow(f"third-order jet {sym} survived in phi^{J}")
        coeffs[jet(J)] = val
    return ProlongedField(Y, coeffs)


def prolong_equivalence(Y: VectorField) -> ProlongedField:
    """Prolongation of an equivalence field to u-jets and first partials of E, H."""
    check_equivalence(Y)
    point = prolong2(Y)
    xi, tau, phi, chi, eta = (Y[c] for c in EQUIV_COORDS)
    coeffs = dict(point.jet_coeffs)
    for I in (t, x, u):
        D = lambda f: extended_total_derivative(f, I)
        coeffs[formal("E", _unit(I))] = sp.expand(
            D(chi) - S.E_t * D(xi) - S.E_x * D(tau) - S.E_u * D(phi))
    Dt = lambda f: extended_total_derivative(f, t)
    coeffs[S.H_t] = sp.expand(Dt(eta) - S.H_t * Dt(xi) - S.H_x * Dt(tau) - S.H_u * Dt(phi))
    return ProlongedField(Y, coeffs)


def _unit(I: sp.Symbol) -> tuple[int, int, int]:
    return tuple(int(I == c) for c in (t, x, u))
