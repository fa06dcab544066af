from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", deadline=None, max_examples=30, derandomize=True)
settings.load_profile("default")


def rationals(lo=-20, hi=20, den=12, nonzero=False):
    s = st.builds(Fraction, st.integers(lo, hi), st.integers(1, den))
    return s.filter(bool) if nonzero else s


def vectors(n=6, **kw):
    return st.lists(rationals(**kw), min_size=n, max_size=n)


@pytest.fixture(scope="session")
def canon():
    from hceclass.liealg import canonical_basis
    return canonical_basis()
