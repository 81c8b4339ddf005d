import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualrisk.errors import DomainError, ModelError, ParseError
from dualrisk.functions import (
    Affine,
    Constant,
    ExpScale,
    HyperbolicShift,
    PowerShift,
    SqrtShift,
    Tabulated,
    evaluate,
    function_from_spec,
)

# strategies drawing valid family instances with parameters in a sane range
_pos = st.floats(min_value=0.01, max_value=20.0, allow_nan=False)
_nonneg = st.floats(min_value=0.0, max_value=20.0, allow_nan=False)


def family_strategy(differentiable_only=False):
    base = [
        st.builds(Constant, _pos),
        st.builds(Affine, _nonneg, _pos),
        st.builds(PowerShift, _pos, st.floats(min_value=0.0, max_value=3.0), _nonneg),
        st.builds(SqrtShift, _pos, _nonneg),
        st.tuples(_pos, _pos).map(lambda t: HyperbolicShift(t[0] + t[1], t[1], -1)),
        st.tuples(_pos, _nonneg).map(lambda t: HyperbolicShift(t[0], t[1], 1)),
        st.builds(ExpScale, _pos, st.floats(min_value=-2.0, max_value=2.0)),
    ]
    if not differentiable_only:
        base.append(
            st.lists(
                st.tuples(_nonneg, _pos), min_size=2, max_size=6, unique_by=lambda t: t[0]
            ).map(lambda pts: Tabulated(sorted(pts)))
        )
    return st.one_of(base)


def test_evaluate_trivial_cases():
    assert evaluate(Affine(1, 0), 5) == 1
    assert evaluate(PowerShift(1, 1, 1), 2) == 3
    assert evaluate(Tabulated([(0, 1), (1, 3)]), 0.5) == 2


def test_evaluate_domain_errors():
    with pytest.raises(DomainError):
        evaluate(Constant(1.0), -0.5)
    with pytest.raises(DomainError):
        evaluate(SqrtShift(1.0, 2.0), 0.0)
    # a sqrt shift without the singular part is fine at zero
    assert evaluate(SqrtShift(1.0, 0.0), 0.0) == 1.0


def test_negative_parameters_rejected():
    for bad in (
        lambda: Constant(-1),
        lambda: Affine(-1, 0),
        lambda: Affine(0, -2),
        lambda: PowerShift(-1, 1, 0),
        lambda: SqrtShift(1, -1),
        lambda: ExpScale(-3, 1),
        lambda: HyperbolicShift(1, 2, -1),  # would go negative at u=0
        lambda: HyperbolicShift(1, 1, 0),
    ):
        with pytest.raises(ModelError):
            bad()


def test_tabulated_validation():
    with pytest.raises(ModelError):
        Tabulated([(0, 1)])
    with pytest.raises(ModelError):
        Tabulated([(0, 1), (0, 2)])
    with pytest.raises(ModelError):
        Tabulated([(1, 1), (0, 2)])
    with pytest.raises(ModelError):
        Tabulated([(0, 1), (1, -1)])


def test_tabulated_interpolation_and_extrapolation():
    f = Tabulated([(1, 2), (3, 4)])
    assert f(2) == 3
    # constant extension on both sides of the grid
    assert f(0) == 2
    assert f(10) == 4
    with pytest.raises(DomainError):
        f.derivative(2.0)


def test_tabulated_antiderivative_exact():
    f = Tabulated([(1, 2), (3, 4)])
    # integral from 0: constant 2 below the grid, trapezoids inside
    assert f.antiderivative(1) == pytest.approx(2.0, abs=1e-14)
    assert f.antiderivative(3) == pytest.approx(2.0 + 6.0, abs=1e-14)
    assert f.antiderivative(5) == pytest.approx(8.0 + 8.0, abs=1e-14)
    assert f.antiderivative(2) == pytest.approx(2.0 + 2.5, abs=1e-14)
    arr = f.antiderivative(np.array([0.5, 2.0, 4.0]))
    assert arr == pytest.approx([1.0, 4.5, 12.0], abs=1e-14)


@given(family_strategy())
@settings(max_examples=60, deadline=None)
def test_antiderivative_matches_function(f):
    # centered finite difference of the antiderivative recovers the function
    rng = np.random.default_rng(0)
    for u in rng.uniform(0.05, 30.0, size=8):
        h = 1e-6 * max(1.0, u)
        fd = (f.antiderivative(u + h) - f.antiderivative(u - h)) / (2 * h)
        assert fd == pytest.approx(float(f(u)), rel=1e-5, abs=1e-7)


@given(family_strategy(differentiable_only=True))
@settings(max_examples=60, deadline=None)
def test_derivative_matches_function(f):
    rng = np.random.default_rng(1)
    for u in rng.uniform(0.1, 20.0, size=6):
        h = 1e-6 * max(1.0, u)
        fd = (float(f(u + h)) - float(f(u - h))) / (2 * h)
        assert fd == pytest.approx(float(f.derivative(u)), rel=1e-4, abs=1e-6)


@given(family_strategy(), st.floats(min_value=0.1, max_value=9.0))
@settings(max_examples=60, deadline=None)
def test_scaled_is_pointwise_multiplication(f, c):
    g = f.scaled(c)
    assert type(g) is type(f)
    for u in (0.2, 1.0, 7.5):
        assert float(g(u)) == pytest.approx(c * float(f(u)), rel=1e-12)


@given(family_strategy())
@settings(max_examples=80, deadline=None)
def test_spec_round_trip(f):
    g = function_from_spec(f.to_spec())
    assert g == f


def test_from_spec_rejects_unknown_fields():
    with pytest.raises(ParseError):
        function_from_spec({"family": "constant", "c": 1.0, "extra": 2})
    with pytest.raises(ParseError):
        function_from_spec({"family": "mystery", "c": 1.0})
    with pytest.raises(ParseError):
        function_from_spec({"c": 1.0})
    with pytest.raises(ParseError):
        function_from_spec({"family": "affine", "a": 1.0})


def test_vectorized_evaluation():
    u = np.array([0.5, 1.0, 2.0])
    f = ExpScale(2.0, -1.0)
    assert f(u) == pytest.approx(2.0 * np.exp(-u))
    assert f.antiderivative(u) == pytest.approx(2.0 * (1 - np.exp(-u)))


def test_growth_classification():
    assert Constant(3).growth() == ("poly", 0.0, 3.0)
    assert Affine(1, 2).growth() == ("poly", 1.0, 2.0)
    assert Affine(1, 0).growth() == ("poly", 0.0, 1.0)
    assert PowerShift(2, 1.5, 1).growth() == ("poly", 1.5, 2.0)
    assert SqrtShift(2, 1).growth() == ("poly", 0.0, 2.0)
    assert HyperbolicShift(1, 3, 1).growth() == ("poly", 0.0, 1.0)
    assert ExpScale(2, -0.5).growth() == ("exp", -0.5, 2.0)
    assert ExpScale(2, 0).growth() == ("poly", 0.0, 2.0)
    with np.errstate(over="ignore"):
        saturated = float(ExpScale(2, 1)(1e6))
    assert math.isinf(saturated) or saturated > 1e300
