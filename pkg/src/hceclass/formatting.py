"""Pinned text grammar for expressions and vector fields, plus LaTeX output.

Grammar: rationals, the registered symbols, + - * / ^, parentheses and the
function tokens exp, ln, Phi, Psi, f, E, H (and their derivative names such
as Phi_1 or E_x).  Strings are produced from normalized expressions, so equal
expressions print identically.
"""

from __future__ import annotations

import re
from typing import Mapping

import sympy as sp
from sympy.parsing.sympy_parser import (convert_xor,
                                        parse_expr, standard_transformations)
from sympy.printing.str import StrPrinter

from . import symexpr as S
from .jetcalc import VectorField


class ExpressionSyntaxError(ValueError):
    """A string does not parse in the pinned grammar."""


class _Printer(StrPrinter):
    def _print_Pow(self, expr, rational=False):
        out = super()._print_Pow(expr, rational)
        return out.replace("**", "^")

    def _print_log(self, expr):
        return f"ln({self._print(expr.args[0])})"

    def _print_Function(self, expr):
        return f"{expr.func.__name__}({', '.join(self._print(a) for a in expr.args)})"


_PRINTER = _Printer({"order": None})


def to_string(e) -> str:
    return _PRINTER.doprint(S.normalize(sp.sympify(e))).replace("**", "^")


_FUNC_RE = re.compile(r"\b([A-Za-z][A-Za-z0-9_]*)\s*\(")


def _function_class(name: str):
    if name == "exp":
        return sp.exp
    if name == "ln":
        return sp.log
    m = re.fullmatch(r"(Phi|Psi)(?:_(\d+))?", name)
    if m:
        return S.formal_function(m.group(1), None, (int(m.group(2) or 0),))
    m = re.fullmatch(r"(f|E|H)(?:_([a-z]+))?", name)
    if m:
        base = m.group(1)
        axes = ("t", "x") if base == "f" else ("x", "u")
        suffix = m.group(2) or ""
        if any(ch not in axes for ch in suffix):
            return None
        return S.formal_function(base, axes, tuple(suffix.count(a) for a in axes))
    return None


def parse(text: str) -> sp.Expr:
    """Parse a pinned-grammar string into a normalized expression."""
    local: dict = {}
    funcs: dict[str, str] = {}

    def repl(m):
        name = m.group(1)
        cls = _function_class(name)
        if cls is None:
            raise ExpressionSyntaxError(f"unknown function {name!r} in {text!r}")
        key = f"__fn{len(funcs)}"
        funcs[key] = name
        local[key] = cls
        return key + "("

    body = _FUNC_RE.sub(repl, text)
    for tok in set(re.findall(r"\b[A-Za-z][A-Za-z0-9_]*\b", body)):
        if tok.startswith("__fn"):
            continue
        sym = S.lookup(tok)
        if sym is None:
            raise ExpressionSyntaxError(f"unknown symbol {tok!r} in {text!r}")
        local[tok] = sym
    try:
        e = parse_expr(body, local_dict=local, global_dict={"Integer": sp.Integer,
                                                              "Rational": sp.Rational,
                                                              "Float": sp.Float,
                                                              "Symbol": sp.Symbol},
                       transformations=standard_transformations + (convert_xor,),
                       evaluate=True)
    except Exception as exc:  # sympy raises a zoo of types here
        raise ExpressionSyntaxError(f"cannot parse {text!r}: {exc}") from None
    if e.atoms(sp.Float):
        raise ExpressionSyntaxError(f"floating-point literal in {text!r}")
    return S.normalize(e)


# ---------------------------------------------------------------- fields

COORD_NAMES = ("t", "x", "u", "E", "H")


def field_to_dict(Y: VectorField) -> dict[str, str]:
    return {str(c): to_string(Y[c]) for c in Y.coords if Y[c] != 0}


def field_from_dict(d: Mapping[str, str], coords=None) -> VectorField:
    from .jetcalc import EQUIV_COORDS
    coords = coords or EQUIV_COORDS
    names = {str(c): c for c in coords}
    bad = set(d) - set(names)
    if bad:
        raise ExpressionSyntaxError(f"unknown coordinates {sorted(bad)}")
    return VectorField(coords, {names[k]: parse(v) for k, v in d.items()})


def field_to_string(Y: VectorField) -> str:
    """Human-readable form such as 2*t*d_t + x*d_x - 2*H*d_H."""
    parts = []
    for c in Y.coords:
        v = S.normalize(Y[c])
        if v == 0:
            continue
        coeff = to_string(v)
        if coeff == "1":
            term = f"d_{c}"
        elif coeff == "-1":
            term = f"-d_{c}"
        elif isinstance(v, sp.Add):
            term = f"({coeff})*d_{c}"
        else:
            term = f"{coeff}*d_{c}"
        parts.append(term)
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


# ---------------------------------------------------------------- LaTeX

def _latex_symbol_names() -> dict:
    names = {}
    for i in range(1, 9):
        names[S.lookup(f"alpha{i}")] = rf"\alpha_{{{i}}}"
    for i in range(1, 5):
        names[S.lookup(f"beta{i}")] = rf"\beta_{{{i}}}"
    return names


def to_latex(e) -> str:
    e = S.normalize(sp.sympify(e))
    e = e.replace(lambda z: isinstance(z, S.FormalFunction) and z.formal_base in ("Phi", "Psi")
                  and not sum(z.formal_index),
                  lambda z: sp.Function("\\" + z.formal_base)(*z.args))
    return sp.latex(e, symbol_names=_latex_symbol_names(), ln_notation=True)


def field_to_latex(Y: VectorField) -> str:
    parts = []
    for c in Y.coords:
        v = S.normalize(Y[c])
        if v == 0:
            continue
        coeff = to_latex(v)
        op = rf"\partial_{{{c}}}"
        if coeff == "1":
            parts.append(op)
        elif coeff == "-1":
            parts.append("-" + op)
        elif isinstance(v, sp.Add):
            parts.append(rf"\left({coeff}\right){op}")
        else:
            parts.append(coeff + op)
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += p if p.startswith("-") else "+" + p
    return out
