import random

import pytest
import sympy as sp

from hceclass import detsys, symexpr as S
from hceclass.detsys import Invalid, Valid
from hceclass.jetcalc import equivalence_field, point_field
from hceclass.symexpr import E, H, t, u, x


@pytest.fixture(scope="module")
def point_system():
    return detsys.determining_system("point")


@pytest.mark.parametrize("degree", [0, 1, 2])
def test_point_kernel_is_time_translation(point_system, degree):
    sol = detsys.solve_polynomial_ansatz(point_system, degree)
    assert len(sol.basis) == 1
    assert sol.basis[0].equals(point_field(1, 0, 0))


def test_equivalence_solution_is_sound():
    sol = detsys.solve_polynomial_ansatz(detsys.determining_system("equivalence"), 2)
    assert len(sol.basis) == 6
    for Y in sol.basis:
        assert isinstance(detsys.verify_generator(Y, "equivalence"), Valid)


@pytest.mark.parametrize("seed", range(5))
def test_fields_outside_the_kernel_fail(seed):
    rng = random.Random(seed)
    c = [sp.Rational(rng.randint(1, 5)) for _ in range(3)]
    Y = point_field(c[0] * x, c[1] * u, c[2] * t)
    assert isinstance(detsys.verify_generator(Y), Invalid)


def test_split_matches_residual_at_random_points():
    residual = detsys.invariance_residual(detsys.generic_field("point"), "point")
    parts = S.collect(residual, detsys.POINT_KERNELS)
    rebuilt = sum(m * c for m, c in parts.items())
    rng = random.Random(1)
    atoms = set(detsys.POINT_KERNELS) | {E, H} | set(S.E_PARTIALS) | set(S.H_PARTIALS) | {S.u_t}
    for _ in range(3):
        vals = {a: sp.Rational(rng.randint(-9, 9), rng.randint(1, 5)) for a in atoms}
        assert sp.expand(residual.subs(vals) - rebuilt.subs(vals)) == 0


def test_power_law_scaling():
    # u_t = (u^-1 u_x)_x + u^3 is invariant under t -> l^2 t, x -> l^(3/2) x, u -> u/l
    Y = point_field(2 * t, sp.Rational(3, 2) * x, -u)
    assert isinstance(detsys.verify_generator(Y, E_form=u ** -1, H_form=u ** 3), Valid)
    assert isinstance(detsys.verify_generator(Y, E_form=u ** 2, H_form=u ** 3), Invalid)


def test_equivalence_generators_valid(canon):
    for Y in canon:
        assert isinstance(detsys.verify_generator(Y, "equivalence"), Valid)
    bad = equivalence_field(0, x ** 2, 0, 0, 0)
    assert isinstance(detsys.verify_generator(bad, "equivalence"), Invalid)
