"""Exact symbolic expressions on the jet space of u_t = (E(x,u) u_x)_x + H(x,u).

Expressions are sympy trees over exact rationals.  This module fixes the
variable universe (independent, dependent and jet variables, flat formal
partials of E and H, parameters), supplies formal one- and two-argument
function symbols whose derivatives are again named function symbols, and
implements the small set of operations the rest of the package relies on:
normalize, diff, substitute, collect and an identity test for expressions
involving exp/ln and arbitrary functions.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import sympy as sp

__all__ = [
    "Kind", "SymbolInfo", "NotPolynomialInBasis",
    "t", "x", "u", "E", "H", "s",
    "jet", "formal", "parameter", "symbol_info", "kind_of",
    "formal_function", "Phi", "Psi", "f_solution", "E_of", "H_of",
    "normalize", "diff", "substitute", "collect", "vanishes", "to_jet",
    "JET_VARS", "SPLIT_JETS", "E_PARTIALS", "H_PARTIALS",
    "u_t", "u_x", "u_tt", "u_tx", "u_xx",
    "E_t", "E_x", "E_u", "E_xx", "E_xu", "E_uu",
    "H_t", "H_x", "H_u", "H_xx", "H_xu", "H_uu",
    "FormalFunction", "lookup",
]


class Kind(enum.Enum):
    INDEPENDENT = "IndependentVar"
    DEPENDENT = "DependentVar"
    JET = "JetVar"
    FORMAL_DERIVATIVE = "FormalDerivative"
    PARAMETER = "Parameter"
    CONSTANT = "Constant"


@dataclass(frozen=True)
class SymbolInfo:
    name: str
    kind: Kind
    base: str | None = None
    index: tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return sum(self.index)


class NotPolynomialInBasis(ValueError):
    """A basis kernel occurs somewhere collect cannot treat as a monomial factor."""


_REGISTRY: dict[sp.Symbol, SymbolInfo] = {}
_BY_NAME: dict[str, sp.Symbol] = {}


def _register(name: str, kind: Kind, base: str | None = None,
              index: tuple[int, ...] = (), **assumptions) -> sp.Symbol:
    if name in _BY_NAME:
        return _BY_NAME[name]
    sym = sp.Symbol(name, **assumptions)
    _REGISTRY[sym] = SymbolInfo(name, kind, base, index)
    _BY_NAME[name] = sym
    return sym


def symbol_info(sym: sp.Symbol) -> SymbolInfo | None:
    return _REGISTRY.get(sym)


def kind_of(sym: sp.Symbol) -> Kind | None:
    info = _REGISTRY.get(sym)
    return info.kind if info else None


def lookup(name: str) -> sp.Symbol | None:
    return _BY_NAME.get(name)


t = _register("t", Kind.INDEPENDENT, real=True)
x = _register("x", Kind.INDEPENDENT, real=True)
u = _register("u", Kind.DEPENDENT, "u", (0, 0), positive=True)

# Multi-indices of u-jets count derivatives in (t, x).
_JET_AXES = ("t", "x")
# Formal partials of E and H count derivatives in (t, x, u).
_FORMAL_AXES = ("t", "x", "u")


def jet(index: tuple[int, int]) -> sp.Symbol:
    """Jet coordinate of u with index[0] t-derivatives and index[1] x-derivatives.

    Orders above 2 exist only for internal cross-checks; the public total
    derivative refuses to produce them.
    """
    nt, nx = index
    if nt < 0 or nx < 0:
        raise ValueError(f"bad jet index {index}")
    if nt == nx == 0:
        return u
    name = "u_" + "t" * nt + "x" * nx
    return _register(name, Kind.JET, "u", (nt, nx))


def formal(base: str, index: tuple[int, int, int] = (0, 0, 0)) -> sp.Symbol:
    """Flat formal partial of E or H; mixed partials are identified."""
    if base not in ("E", "H"):
        raise ValueError(f"no formal partials for {base!r}")
    name = base
    if sum(index):
        name += "_" + "".join(a * k for a, k in zip(_FORMAL_AXES, index))
    assumptions = {"positive": True} if not sum(index) else {}
    return _register(name, Kind.FORMAL_DERIVATIVE, base, tuple(index), **assumptions)


def parameter(name: str) -> sp.Symbol:
    return _register(name, Kind.PARAMETER)


E = formal("E")
H = formal("H")
s = parameter("s")

u_t, u_x = jet((1, 0)), jet((0, 1))
u_tt, u_tx, u_xx = jet((2, 0)), jet((1, 1)), jet((0, 2))
JET_VARS = (u_t, u_x, u_tt, u_tx, u_xx)
# After eliminating u_t, the remaining jets that the invariance condition is split over.
SPLIT_JETS = (u_x, u_tt, u_tx, u_xx)

E_t, E_x, E_u = formal("E", (1, 0, 0)), formal("E", (0, 1, 0)), formal("E", (0, 0, 1))
E_xx, E_xu, E_uu = formal("E", (0, 2, 0)), formal("E", (0, 1, 1)), formal("E", (0, 0, 2))
H_t, H_x, H_u = formal("H", (1, 0, 0)), formal("H", (0, 1, 0)), formal("H", (0, 0, 1))
H_xx, H_xu, H_uu = formal("H", (0, 2, 0)), formal("H", (0, 1, 1)), formal("H", (0, 0, 2))
E_PARTIALS = (E_x, E_u, E_xx, E_xu, E_uu)
H_PARTIALS = (H_x, H_u, H_xx, H_xu, H_uu)

for _i in range(1, 9):
    parameter(f"alpha{_i}")
for _i in range(1, 5):
    parameter(f"beta{_i}")
for _i in range(1, 7):
    parameter(f"c{_i}")
parameter("c")


# ---------------------------------------------------------------- functions

class FormalFunction(sp.Function):
    """Arbitrary smooth function; derivatives are further FormalFunctions."""

    formal_base: str = ""
    formal_index: tuple[int, ...] = ()
    formal_axes: tuple[str, ...] | None = None

    def fdiff(self, argindex=1):
        idx = list(self.formal_index)
        idx[argindex - 1] += 1
        cls = formal_function(self.formal_base, self.formal_axes, tuple(idx))
        return cls(*self.args)


def formal_function(name: str, axes: tuple[str, ...] | None = None,
                    index: tuple[int, ...] | None = None) -> type[FormalFunction]:
    """Class of the formal function `name` (one argument unless `axes` given).

    One-argument derivatives are named Phi_1, Phi_2, ...; functions with named
    axes get letter suffixes, so E(x, u) differentiates to E_x(x, u).
    """
    axes = tuple(axes) if axes else None
    nargs = len(axes) if axes else 1
    index = tuple(index) if index is not None else (0,) * nargs
    if len(index) != nargs:
        raise ValueError("index length must match the argument count")
    return _formal_class(name, axes, index)


@lru_cache(maxsize=None)
def _formal_class(name: str, axes: tuple[str, ...] | None,
                  index: tuple[int, ...]) -> type[FormalFunction]:
    nargs = len(axes) if axes else 1
    if sum(index) == 0:
        label = name
    elif axes:
        label = name + "_" + "".join(a * k for a, k in zip(axes, index))
    else:
        label = f"{name}_{index[0]}"
    return type(label, (FormalFunction,), {
        "nargs": nargs,
        "formal_base": name,
        "formal_index": index,
        "formal_axes": axes,
    })


Phi = formal_function("Phi")
Psi = formal_function("Psi")
f_solution = formal_function("f", ("t", "x"))
E_of = formal_function("E", ("x", "u"))
H_of = formal_function("H", ("x", "u"))


def to_jet(e: sp.Expr) -> sp.Expr:
    """Replace applied E(x,u), H(x,u) and their derivatives by flat formal symbols."""
    def is_eh(z):
        return isinstance(z, FormalFunction) and z.formal_base in ("E", "H") \
            and z.formal_axes == ("x", "u")

    def flat(z):
        nx, nu = z.formal_index
        return formal(z.formal_base, (0, nx, nu))

    return e.replace(is_eh, flat)


# ---------------------------------------------------------------- operations

def _log_of_exp(e: sp.Expr) -> sp.Expr:
    return e.replace(lambda z: isinstance(z, sp.log) and isinstance(z.args[0], sp.exp),
                     lambda z: z.args[0].args[0])


def normalize(e) -> sp.Expr:
    """Canonical expanded form; exp factors of a product are merged."""
    e = sp.sympify(e)
    prev = None
    for _ in range(8):
        if e == prev:
            break
        prev = e
        e = _log_of_exp(e)
        e = sp.expand(e, power_exp=False)
        e = sp.powsimp(e, combine="exp", deep=True)
    return e


def diff(e, v: sp.Symbol) -> sp.Expr:
    """Partial derivative; distinct symbols are independent."""
    return sp.diff(sp.sympify(e), v)


def substitute(e, bindings: Mapping) -> sp.Expr:
    """Simultaneous substitution followed by normalize."""
    e = sp.sympify(e)
    if not bindings:
        return normalize(e)
    return normalize(e.subs(dict(bindings), simultaneous=True))


def collect(e, basis: Iterable[sp.Symbol]) -> dict[sp.Expr, sp.Expr]:
    """Split e as a polynomial in the basis kernels: {monomial: coefficient}."""
    basis = tuple(basis)
    bset = set(basis)
    out: dict[tuple[int, ...], list[sp.Expr]] = defaultdict(list)
    for term in sp.Add.make_args(sp.expand(sp.sympify(e))):
        if term == 0:
            continue
        powers = [0] * len(basis)
        rest = []
        for fac in sp.Mul.make_args(term):
            b, k = fac.as_base_exp()
            if b in bset:
                if not (k.is_Integer and k > 0):
                    raise NotPolynomialInBasis(f"{fac} is not a monomial factor")
                powers[basis.index(b)] += int(k)
            else:
                if fac.free_symbols & bset:
                    raise NotPolynomialInBasis(f"basis kernel inside {fac}")
                rest.append(fac)
        out[tuple(powers)].append(sp.Mul(*rest))
    result = {}
    for powers, coeffs in out.items():
        c = sp.Add(*coeffs)
        if c != 0:
            mono = sp.Mul(*(b ** k for b, k in zip(basis, powers)))
            result[mono] = c
    return result


def _freeze_formal(e: sp.Expr) -> sp.Expr:
    """Replace each distinct applied formal function by a fresh symbol.

    Values of an arbitrary function and of its derivatives at a point are
    free, so an identity in them holds iff it holds with independent symbols.
    """
    apps = sorted(e.atoms(FormalFunction), key=sp.default_sort_key)
    mapping = {a: sp.Dummy(f"k{i}") for i, a in enumerate(apps)}
    return e.xreplace(mapping) if mapping else e


def _split_exponential(term: sp.Expr) -> tuple[sp.Expr, sp.Expr]:
    """Write a product as rest * exp(L) with rest rational in its atoms."""
    exponent = sp.S.Zero
    rest = []
    stack = [(fac, sp.S.One) for fac in sp.Mul.make_args(term)]
    while stack:
        fac, power = stack.pop()
        if isinstance(fac, sp.exp):
            exponent += power * fac.args[0]
        elif fac.is_Pow and not fac.exp.is_Integer:
            exponent += power * fac.exp * sp.log(fac.base)
        elif fac.is_Pow and isinstance(fac.base, sp.Add) and fac.base.has(sp.exp):
            # pull common exponentials out of a denominator or power
            pulled = sp.factor_terms(fac.base)
            if pulled == fac.base:
                rest.append(fac ** power)
            else:
                stack.extend((g, power * fac.exp) for g in sp.Mul.make_args(pulled))
        elif fac.is_Pow and fac.base.is_Mul:
            stack.extend((g, power * fac.exp) for g in sp.Mul.make_args(fac.base))
        else:
            rest.append(fac ** power)
    exponent = sp.expand(sp.expand_log(sp.expand(exponent), force=True))
    kept = []
    for a in sp.Add.make_args(exponent):
        c, k = a.as_coeff_Mul()
        if isinstance(k, sp.log) and c.is_Integer:
            rest.append(k.args[0] ** c)
        elif all(kind_of(z) == Kind.PARAMETER for z in a.free_symbols):
            # exp of a constant is a coefficient, not a new exponential class
            rest.append(sp.exp(a))
        else:
            kept.append(a)
    return sp.Add(*kept), sp.Mul(*rest)


def vanishes(e) -> bool:
    """True iff e is identically zero, arbitrary functions included.

    Terms are grouped by their exponential factor exp(L); distinct L are
    independent over rational functions, and each group is tested by
    rational cancellation.
    """
    e = _freeze_formal(sp.sympify(e))
    e = sp.expand(_log_of_exp(e), power_exp=True)
    if e == 0:
        return True
    groups: dict[sp.Expr, list[sp.Expr]] = defaultdict(list)
    for term in sp.Add.make_args(e):
        exponent, rest = _split_exponential(term)
        groups[exponent].append(rest)
    return all(sp.cancel(sp.together(sp.Add(*g))) == 0 for g in groups.values())
