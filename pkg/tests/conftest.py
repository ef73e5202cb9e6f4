import math
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

import hypothesis.strategies as st

from trigcalc import (
    Add, Const, Cos, Div, IntPow, Mul, Neg, Param, Sin, Sub, Var, X,
)

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")


def _leaves():
    small_fraction = st.builds(
        Fraction,
        st.integers(min_value=-9, max_value=9),
        st.integers(min_value=1, max_value=4),
    )
    return st.one_of(
        st.builds(Const, small_fraction),
        st.builds(Const, st.floats(min_value=-3, max_value=3, allow_nan=False,
                                   width=32).map(float)),
        st.just(X),
        st.sampled_from([Param("a"), Param("b")]),
    )


def _compound(children):
    nonzero_const = st.builds(
        Const,
        st.integers(min_value=1, max_value=5).map(Fraction),
    )
    return st.one_of(
        st.builds(Add, children, children),
        st.builds(Sub, children, children),
        st.builds(Mul, children, children),
        st.builds(Neg, children),
        st.builds(Sin, children),
        st.builds(Cos, children),
        st.builds(IntPow, children, st.integers(min_value=0, max_value=3)),
        st.builds(Div, children, nonzero_const),
    )


#: Expressions that are smooth everywhere (division only by nonzero
#: literals, nonnegative exponents), suitable for derivative checks.
smooth_exprs = st.recursive(_leaves(), _compound, max_leaves=10)


@pytest.fixture
def base_env():
    return {"a": 0.7, "b": -1.3}


@pytest.fixture
def pi():
    return math.pi
