from fractions import Fraction

import sympy as sp
from hypothesis import given, strategies as st

from hceclass import linalg
from conftest import rationals

matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 5).flatmap(
        lambda n: st.lists(st.lists(rationals(lo=-4, hi=4, den=3), min_size=n, max_size=n),
                           min_size=m, max_size=m)))


@given(matrices)
def test_rank_agrees_with_sympy(rows):
    assert linalg.rank(rows, len(rows[0])) == sp.Matrix(rows).rank()


@given(matrices)
def test_nullspace_is_annihilated_and_complete(rows):
    n = len(rows[0])
    ns = linalg.nullspace(rows, n)
    for v in ns:
        assert all(sum(Fraction(a) * b for a, b in zip(r, v)) == 0 for r in rows)
    assert len(ns) == n - sp.Matrix(rows).rank()


def test_inverse_roundtrip():
    A = [[2, 1, 0], [1, 3, 1], [0, 1, 4]]
    assert linalg.matmul(A, linalg.inverse(A)) == linalg.identity(3)


def test_solve():
    assert linalg.solve([[1, 1], [1, -1]], [3, 1]) == [2, 1]
    assert linalg.solve([[1, 1], [2, 2]], [1, 3]) is None
