import pytest
import sympy as sp
from hypothesis import given, strategies as st

from hceclass import symexpr as S
from hceclass.formatting import (ExpressionSyntaxError, field_from_dict, field_to_dict, parse,
                                 to_latex, to_string)
from hceclass.jetcalc import EQUIV_COORDS, VectorField
from hceclass.symexpr import E, H, t, u, x
from conftest import rationals

ATOMS = [t, x, u, E, H, S.lookup("alpha1"), S.Phi(u - x), sp.log(u), sp.exp(x)]
exprs = st.recursive(
    st.one_of(st.sampled_from(ATOMS), rationals(lo=-5, hi=5, den=4).map(sp.Rational)),
    lambda k: st.one_of(st.builds(sp.Add, k, k), st.builds(sp.Mul, k, k),
                        st.builds(lambda a: a ** 2, k), st.builds(lambda a: a ** -1, k.filter(bool))),
    max_leaves=5,
)


@given(exprs)
def test_string_round_trip(e):
    e = S.normalize(e)
    assert S.vanishes(parse(to_string(e)) - e)


@given(st.lists(exprs, min_size=5, max_size=5))
def test_field_round_trip(cs):
    Y = VectorField(EQUIV_COORDS, dict(zip(EQUIV_COORDS, cs)))
    back = field_from_dict(field_to_dict(Y))
    assert all(S.vanishes(back[c] - S.normalize(Y[c])) for c in EQUIV_COORDS)


def test_power_uses_caret():
    assert to_string(u ** 2) == "u^2"
    assert parse("u^2") == u ** 2


@pytest.mark.parametrize("bad", ["foo(u)", "u +", "1.5*u", "q*u"])
def test_rejects_outside_grammar(bad):
    with pytest.raises(ExpressionSyntaxError):
        parse(bad)


def test_unknown_coordinate():
    with pytest.raises(ExpressionSyntaxError):
        field_from_dict({"y": "1"})


def test_latex_arbitrary_function():
    assert "Phi" in to_latex(S.Phi(u))
