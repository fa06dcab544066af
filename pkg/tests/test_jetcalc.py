import random

import pytest
import sympy as sp
from hypothesis import given, strategies as st

from hceclass import jetcalc as J
from hceclass import symexpr as S
from hceclass.symexpr import t, u, x

JETS = (S.u_x, S.u_t, S.u_xx, S.u_tx, S.u_tt)


def poly_field(rng, degree=2):
    monos = [t ** i * x ** j * u ** k for i in range(3) for j in range(3) for k in range(3)
             if i + j + k <= degree]

    def p():
        return sum(sp.Rational(rng.randint(-3, 3)) * m for m in monos if rng.random() < 0.4)
    return J.point_field(p(), p(), p())


def _same(A, B):
    return all(sp.expand(A[c] - B[c]) == 0 for c in JETS)


@given(st.integers(0, 10 ** 6))
def test_two_prolongation_routes_agree(seed):
    Y = poly_field(random.Random(seed))
    assert _same(J.prolong2(Y), J.prolong2_characteristic(Y))


@given(st.integers(0, 10 ** 6), st.integers(-3, 3), st.integers(-3, 3))
def test_prolongation_is_linear(seed, a, b):
    rng = random.Random(seed)
    Y, Z = poly_field(rng), poly_field(rng)
    lhs = J.prolong2(Y.scaled(a) + Z.scaled(b))
    PY, PZ = J.prolong2(Y), J.prolong2(Z)
    assert all(sp.expand(lhs[c] - a * PY[c] - b * PZ[c]) == 0 for c in JETS)


def test_mixed_total_derivatives():
    assert J.total_derivative(J.total_derivative(u, t), x) == S.u_tx
    assert J.total_derivative(J.total_derivative(u, x), t) == S.u_tx


def test_order_cap():
    with pytest.raises(J.JetOrderOverflow):
        J.total_derivative(S.u_xx, x)


def test_first_order_expanded_identity():
    Y = J.point_field(t * x, x * u, u ** 2 + t)
    D = J.total_derivative
    expected = D(Y[u], x) - S.u_t * D(Y[t], x) - S.u_x * D(Y[x], x)
    assert sp.expand(J.prolong2(Y)[S.u_x] - expected) == 0


def test_characteristic_uses_phi():
    Y = J.point_field(1, 0, u)
    assert sp.expand(J.characteristic(Y) - (u - S.u_t)) == 0
