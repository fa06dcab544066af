from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import assume, given, strategies as st

from hceclass import optsys
from hceclass.jetcalc import EQUIV_COORDS, VectorField
from hceclass.liealg import canonical_basis
from conftest import rationals, vectors


def _normal(a):
    try:
        return optsys.normalize(a)
    except optsys.UncoveredSubalgebra:
        return None


def _matrix_apply(R, v):
    return [sum(Fraction(R[k][j]) * v[j] for j in range(6)) for k in range(6)]


@pytest.mark.parametrize("idx,v", optsys.branch_suite())
def test_branch_suite_reaches_its_representative(idx, v):
    nf = optsys.normalize(v)
    assert nf.index == idx
    assert optsys.word_round_trip(v, nf)


def test_branch_suite_size():
    suite = optsys.branch_suite()
    assert len(suite) >= 40
    assert {i for i, _ in suite} == set(optsys.REPRESENTATIVES)


def test_worked_example_recovers_parameter():
    nf = optsys.normalize([5, 0, 0, 1, 0, 1])
    assert nf.index == 17
    assert list(nf.params.values()) == [Fraction(1)]
    assert optsys.apply_word([5, 0, 0, 1, 0, 1], nf.word) == nf.vector


@given(vectors().filter(any), rationals(lo=1, hi=30, den=7))
def test_scale_equivariance(a, q):
    nf = _normal(a)
    assume(nf is not None)
    assert optsys.normalize([q * c for c in a]).index == nf.index


@given(vectors().filter(any))
def test_word_validity(a):
    nf = _normal(a)
    assume(nf is not None)
    image = optsys.apply_word(a, nf.word)
    assert image == nf.vector
    assert nf.representative.match(image) == (nf.signs, nf.params)


@given(vectors(), vectors(), rationals(), rationals())
def test_projection_is_linear(a, b, p, q):
    basis = canonical_basis()

    def field(v):
        out = VectorField(EQUIV_COORDS, {})
        for c, Y in zip(v, basis):
            out = out + Y.scaled(sp.Rational(c.numerator, c.denominator))
        return out

    P, Q = sp.Rational(p.numerator, p.denominator), sp.Rational(q.numerator, q.denominator)
    lhs = optsys.project(field(a).scaled(P) + field(b).scaled(Q))
    rhs = optsys.project(field(a)).scaled(P) + optsys.project(field(b)).scaled(Q)
    assert lhs.equals(rhs)


@given(vectors().filter(any), st.sampled_from(["t", "u", "E", "H"]))
def test_reflection_closure(a, coord):
    nf = _normal(a)
    assume(nf is not None)
    image = _matrix_apply(optsys.reflection_matrix(coord), a)
    assert optsys.normalize(image).index == nf.index


def test_first_representative_projects_to_zero():
    fields = optsys.projections()
    assert fields[1][0][1].is_zero()
    assert sum(len(v) for k, v in fields.items() if k != 1) > 0


def test_listed_pairs_related_by_one_move():
    for i, j, w in optsys.redundant_pairs():
        assert i != j
        assert w.steps[0][1] == 2


def test_seed_from_env(monkeypatch):
    monkeypatch.setenv("HCECLASS_SEED", "17")
    assert optsys.seed_from_env() == 17
    monkeypatch.setenv("HCECLASS_SEED", "seventeen")
    with pytest.raises(ValueError):
        optsys.seed_from_env()
    monkeypatch.delenv("HCECLASS_SEED")
    assert optsys.seed_from_env(5) == 5


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        optsys.normalize([0] * 6)
