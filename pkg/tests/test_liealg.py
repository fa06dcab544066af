import itertools
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given

from hceclass import liealg, optsys
from hceclass.jetcalc import EQUIV_COORDS
from hceclass.report import golden
from hceclass.formatting import parse
from hceclass.symexpr import s
from conftest import vectors

ALG = liealg.canonical_algebra()


def direct_bracket(Y, Z):
    return {c: sp.expand(Y(Z[c]) - Z(Y[c])) for c in EQUIV_COORDS}


def combo(vec, basis):
    return {c: sp.expand(sum(sp.Rational(a.numerator, a.denominator) * B[c]
                             for a, B in zip(vec, basis))) for c in EQUIV_COORDS}


def test_brackets_against_direct_differentiation(canon):
    for i, j in itertools.product(range(6), repeat=2):
        assert direct_bracket(canon[i], canon[j]) == combo(ALG.structure[i][j], canon)


def test_structure_table_matches_golden():
    entries = golden("table1")["entries"]
    assert len(entries) == 36
    for ent in entries:
        i, j = liealg.NAMES.index(ent["row"]), liealg.NAMES.index(ent["col"])
        expected = sum(parse(v) * sp.Symbol(k) for k, v in ent["value"].items())
        got = sum(sp.Rational(c.numerator, c.denominator) * sp.Symbol(n)
                  for c, n in zip(ALG.structure[i][j], liealg.NAMES))
        assert sp.expand(expected - got) == 0, (i, j)


@given(vectors(), vectors())
def test_antisymmetry(a, b):
    assert ALG.bracket_vec(a, b) == [-q for q in ALG.bracket_vec(b, a)]


@given(vectors(), vectors(), vectors())
def test_jacobi(a, b, c):
    br = ALG.bracket_vec
    total = [p + q + r for p, q, r in zip(br(a, br(b, c)), br(b, br(c, a)), br(c, br(a, b)))]
    assert not any(total)


def test_killing_form_by_trace():
    a, b = sp.symbols("a1:7"), sp.symbols("b1:7")
    ad = lambda v: sp.Matrix(ALG.ad(v))
    K = liealg.killing_matrix()
    for i, j in itertools.product(range(6), repeat=2):
        ei, ej = liealg.unit(6, i), liealg.unit(6, j)
        assert K[i][j] == (ad(ei) * ad(ej)).trace()
    closed = 5 * a[3] * b[3] - 2 * (a[3] * b[4] + a[4] * b[3]) + a[4] * b[4] + a[5] * b[5]
    poly = sum(K[i][j] * a[i] * b[j] for i in range(6) for j in range(6))
    assert sp.expand(poly - closed) == 0
    for k in range(3):
        assert all(v == 0 for v in K[k])


def test_derived_series():
    L1, *rest = liealg.derived_series()
    span = sp.Matrix([[sp.Rational(q.numerator, q.denominator) for q in v] for v in L1])
    assert span.rank() == 3
    assert all(not any(v[3:]) for v in L1)
    assert all(not level for level in rest)


@pytest.mark.parametrize("i", range(6))
def test_adjoint_matches_matrix_exponential(i):
    M = -s * sp.Matrix(ALG.ad(liealg.unit(6, i)))
    oracle = sp.simplify(M.exp())
    ours = liealg.adjoint_matrix(i)
    for r, c in itertools.product(range(6), repeat=2):
        assert sp.simplify(ours[r][c].to_sympy() - oracle[r, c]) == 0


@pytest.mark.parametrize("i", range(6))
def test_adjoint_group_law_and_derivative(i):
    r = sp.Symbol("r")
    A = sp.Matrix([[e.to_sympy() for e in row] for row in liealg.adjoint_matrix(i)])
    assert sp.simplify(A * A.subs(s, r) - A.subs(s, s + r)) == sp.zeros(6, 6)
    for j in range(6):
        d = [sp.diff(e.to_sympy(), s).subs(s, 0) for e in liealg.adjoint_action(i, j)]
        assert d == [-q for q in ALG.structure[i][j]]


@pytest.mark.parametrize("i", range(6))
def test_flow_solves_its_ode(i, canon):
    F = liealg.flow(i)
    for c in EQUIV_COORDS:
        lhs = sp.diff(F.maps[c], s)
        rhs = canon[i][c].xreplace(F.maps)
        assert sp.simplify(lhs - rhs) == 0
        assert F.maps[c].subs(s, 0) == c


@pytest.mark.parametrize("i", range(6))
def test_solution_rules_verify(i):
    assert liealg.verify_rule(liealg.transform_solution(i))


@pytest.mark.parametrize("coord", ["t", "u", "E", "H", "x"])
def test_reflections_are_automorphisms(coord):
    R = optsys.reflection_matrix(coord)
    apply = lambda v: [sum(Fraction(R[k][j]) * v[j] for j in range(6)) for k in range(6)]
    for i, j in itertools.product(range(6), repeat=2):
        ei, ej = liealg.unit(6, i), liealg.unit(6, j)
        assert apply(ALG.bracket_vec(ei, ej)) == ALG.bracket_vec(apply(ei), apply(ej))


def test_printed_fourth_generator_changes_the_table():
    printed = liealg.LieAlgebra.from_fields(liealg.printed_basis())
    assert not any(printed.structure[1][3])
    assert ALG.structure[1][3] == tuple(liealg.unit(6, 1))
