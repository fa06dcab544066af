import pytest
import sympy as sp

from hceclass import detsys, invclass, optsys
from hceclass.detsys import Valid
from hceclass.formatting import to_string
from hceclass.jetcalc import point_field
from hceclass.symexpr import u, x


def _instances():
    out = []
    for z in range(1, 24):
        rep = optsys.REPRESENTATIVES[optsys.a_indices_of(z)[0]]
        for sg in optsys.sign_instances(rep):
            out.append((z, sg))
    return out


@pytest.fixture(scope="module")
def entries():
    return invclass.classify_all()


@pytest.mark.parametrize("z,signs", _instances())
def test_invariants_are_annihilated_and_independent(z, signs):
    Z = invclass.z_field(z, signs)
    inv = invclass.invariants_of(Z)
    for I in inv.as_list():
        assert invclass.annihilates(Z, I)
    assert invclass.jacobian_rank(inv) == 3


def test_translation_pair_invariant():
    inv = invclass.invariants_of(invclass.z_field(6))
    assert sp.expand(inv.I1 - (u - x)) == 0 or sp.expand(inv.I1 + (u - x)) == 0


def test_vertical_generator_has_no_invariant_equation():
    fam = invclass.reconstruct_equation(invclass.invariants_of(invclass.z_field(4)))
    assert isinstance(fam, invclass.NoInvariantEquation)
    assert not fam


def test_every_entry_verifies(entries):
    assert entries
    for e in entries:
        assert e.verified, (e.row, e.z, e.signs, e.regime)


def test_time_translation_survives(entries):
    dt = point_field(1, 0, 0)
    for e in entries:
        if e.family:
            assert isinstance(detsys.verify_generator(dt, E_form=e.family.E_form,
                                                      H_form=e.family.H_form), Valid)


def test_additional_operators_verify(entries):
    for e in entries:
        if not e.family:
            continue
        for X in e.operators:
            assert isinstance(detsys.verify_generator(X, E_form=e.family.E_form,
                                                      H_form=e.family.H_form), Valid)


def test_forms_are_invariant_under_their_generator(entries):
    from hceclass.symexpr import E, H
    for e in entries:
        if e.family:
            assert invclass.form_invariant(e.Z, E, e.family.E_form)
            assert invclass.form_invariant(e.Z, H, e.family.H_form)


def test_canonical_operator_scaling():
    from hceclass.jetcalc import VectorField, EQUIV_COORDS
    from hceclass.symexpr import t
    X = VectorField(EQUIV_COORDS, {t: 4 * t, x: 2 * x})
    assert to_string(invclass.canonical_operator(X)[t]) == "2*t"
    assert invclass.canonical_operator(X)[x] == x


def test_parameter_binding_changes_regime():
    rows = invclass.classify_all(params={"alpha8": sp.Rational(1, 2), "beta4": sp.Rational(2)})
    assert all(e.verified for e in rows)
