import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualrisk.errors import DomainError
from dualrisk.quad import integrate_finite
from dualrisk.specfun import SpecialValue, erf, erfc, kummer_j, tricomi_u, upper_gamma

# standard-normal central mass, from quadrature of the density (no erf involved)
_CENTRAL_MASS = 2.0 * integrate_finite(
    lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), 0.0, 1.0, tol=1e-14
).value


def _erfc_asymptotic(x, terms=8):
    # erfc(x) ~ e^{-x^2}/(x sqrt(pi)) * sum (-1)^n (2n-1)!! / (2x^2)^n
    s, term = 1.0, 1.0
    for n in range(1, terms):
        term *= -(2 * n - 1) / (2 * x * x)
        s += term
    return math.exp(-x * x) / (x * math.sqrt(math.pi)) * s


def test_special_value_carries_bound():
    v = SpecialValue(1.5, 1e-10)
    assert float(v) == 1.5
    assert v.abs_error_bound == 1e-10
    assert v + 1 == 2.5
    with pytest.raises(DomainError):
        SpecialValue(1.0, -1e-3)


def test_erf_trivial_and_derived():
    assert erf(0.0) == 0.0
    assert erf(1.0 / math.sqrt(2.0)) == pytest.approx(_CENTRAL_MASS, abs=1e-13)
    assert erf(-2.0) == -erf(2.0)


def test_erfc_large_argument():
    v = erfc(10.0)
    assert 0 < v < 1e-40
    assert v == pytest.approx(_erfc_asymptotic(10.0), rel=1e-10)


def test_erf_erfc_complement():
    rng = np.random.default_rng(11)
    for x in rng.uniform(-6, 6, size=1000):
        assert abs(erf(x) + erfc(x) - 1.0) <= 1e-14


def test_upper_gamma_trivial():
    for x in (0.0, 1.0, 5.0):
        assert upper_gamma(1.0, x) == pytest.approx(math.exp(-x), rel=1e-12)
    assert upper_gamma(0.5, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-13)


def test_upper_gamma_derived():
    # identity cross-check and direct quadrature of the defining integral
    want = math.sqrt(math.pi) * erfc(math.sqrt(0.5))
    got = upper_gamma(0.5, 0.5)
    assert got == pytest.approx(want, rel=1e-12)
    direct = integrate_finite(
        lambda t: t ** -0.5 * math.exp(-t), 0.5, 60.0, tol=1e-13
    ).value
    assert got == pytest.approx(direct, rel=1e-10)


def test_upper_gamma_recurrence():
    rng = np.random.default_rng(3)
    for _ in range(40):
        s = rng.uniform(0.05, 5.0)
        x = rng.uniform(0.0, 10.0)
        lhs = upper_gamma(s + 1.0, x)
        rhs = s * upper_gamma(s, x) + x**s * math.exp(-x)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-280)


def test_upper_gamma_domain():
    with pytest.raises(DomainError):
        upper_gamma(0.0, 1.0)
    with pytest.raises(DomainError):
        upper_gamma(1.0, -0.5)


def test_kummer_trivial():
    assert kummer_j(0.5, 1.5, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert kummer_j(1.0, 2.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-12)


def test_kummer_derived_oracle():
    # brute-force quadrature of the defining integral, split wide of the
    # endpoint singularities and summed with a tight tolerance
    a, b, x = 0.5, 1.5, -2.0
    pre = math.gamma(b) / (math.gamma(a) * math.gamma(b - a))
    f = lambda t: math.exp(x * t) * t ** (a - 1.0) * (1.0 - t) ** (b - a - 1.0)
    oracle = pre * (
        integrate_finite(f, 0.0, 0.5, tol=1e-13).value
        + integrate_finite(f, 0.5, 1.0, tol=1e-13).value
    )
    assert kummer_j(a, b, x) == pytest.approx(oracle, rel=1e-11)


def test_kummer_domain():
    for a, b in ((1.0, 1.0), (2.0, 1.0), (0.0, 1.0), (-1.0, 2.0)):
        with pytest.raises(DomainError):
            kummer_j(a, b, 1.0)


def _ode_residual(y, a, b, x, h=0.02):
    # x y'' + (b - x) y' - a y at x via Richardson-extrapolated central
    # differences: one refinement kills the h^2 truncation term while h stays
    # large enough that quadrature noise in y does not swamp y''
    def stencils(step):
        ym, yp = y(x - step), y(x + step)
        return (yp - ym) / (2 * step), (yp - 2 * y0 + ym) / (step * step)

    y0 = y(x)
    d1h, d2h = stencils(h)
    d1half, d2half = stencils(h / 2)
    d1 = (4 * d1half - d1h) / 3
    d2 = (4 * d2half - d2h) / 3
    return x * d2 + (b - x) * d1 - a * y0, y0


@settings(max_examples=50, deadline=None)
@given(
    a=st.floats(0.1, 4.0),
    gap=st.floats(0.1, 4.0),
    x=st.floats(-10.0, 10.0),
)
def test_kummer_satisfies_ode(a, gap, x):
    b = a + gap
    if abs(x) < 1e-2:
        x = 1e-2 if x >= 0 else -1e-2
    res, y0 = _ode_residual(lambda t: kummer_j(a, b, t), a, b, x)
    assert abs(res) <= 1e-6 * max(1.0, abs(y0))


def test_tricomi_satisfies_ode():
    rng = np.random.default_rng(5)
    for _ in range(25):
        a = rng.uniform(0.1, 3.0)
        b = rng.uniform(-2.0, 4.0)
        z = rng.uniform(1.0, 12.0)
        res, y0 = _ode_residual(lambda t: tricomi_u(a, b, t), a, b, z)
        assert abs(res) <= 1e-6 * max(1.0, abs(y0))


def test_tricomi_decays():
    # large-z behavior ~ z^{-a}
    a, b = 1.5, 0.7
    assert tricomi_u(a, b, 50.0) == pytest.approx(50.0**-a, rel=0.1)
    with pytest.raises(DomainError):
        tricomi_u(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        tricomi_u(1.0, 1.0, -1.0)


def test_tricomi_kummer_wronskian_relation():
    # both solve the same equation; check U against a linear combination
    # fitted at two points then verified at a third
    a, b = 0.75, 1.25
    z1, z2, z3 = 1.0, 2.0, 3.5
    # second independent solution x^{1-b} J(a-b+1, 2-b; x)
    j1 = lambda x: kummer_j(a, b, x)
    j2 = lambda x: x ** (1.0 - b) * kummer_j(a - b + 1.0, 2.0 - b, x)
    import numpy.linalg as la

    A = np.array([[j1(z1), j2(z1)], [j1(z2), j2(z2)]])
    rhs = np.array([tricomi_u(a, b, z1), tricomi_u(a, b, z2)])
    c = la.solve(A, rhs)
    pred = c[0] * j1(z3) + c[1] * j2(z3)
    assert tricomi_u(a, b, z3) == pytest.approx(pred, rel=1e-8)


def test_error_bounds_reported():
    for v in (erf(1.0), erfc(3.0), upper_gamma(2.0, 1.0), kummer_j(1.0, 2.0, 1.0),
              tricomi_u(1.0, 1.5, 2.0)):
        assert isinstance(v, SpecialValue)
        assert math.isfinite(v.abs_error_bound) and v.abs_error_bound >= 0.0


def test_quadrature_bounds_honest_against_known_values():
    # where an exact value exists, the reported bound must cover the error
    v = kummer_j(1.0, 2.0, 1.0)
    assert abs(float(v) - (math.e - 1.0)) <= max(v.abs_error_bound, 1e-14)
    g = upper_gamma(1.0, 1.0)
    assert abs(float(g) - math.exp(-1.0)) <= max(g.abs_error_bound, 1e-15)
