"""Special functions used by the closed-form catalogs.

Everything here returns a SpecialValue, a float that carries an absolute
error bound alongside the value. The error function and its complement come
from libm. The upper incomplete gamma wraps the regularized routine from
scipy. The two confluent hypergeometric solutions are evaluated from their
integral representations by adaptive quadrature with endpoint substitutions,
because the closed-form ruin formulas need them at parameter points where
series recurrences lose accuracy.
"""

import math

from scipy import special as _sp

from . import quad
from .errors import DomainError

__all__ = [
    "SpecialValue",
    "erf",
    "erfc",
    "upper_gamma",
    "kummer_j",
    "tricomi_u",
]

_EPS = 2.220446049250313e-16


class SpecialValue(float):
    """A float together with an absolute error bound on itself.

    Behaves as its value in arithmetic; the bound rides along only on the
    object itself and is dropped by operations, so propagate bounds by hand
    where they matter.

    Attributes:
        abs_error_bound: nonnegative finite bound on |value - true value|.
    """

    __slots__ = ("abs_error_bound",)

    def __new__(cls, value, abs_error_bound=0.0):
        self = super().__new__(cls, value)
        bound = float(abs_error_bound)
        if not (math.isfinite(bound) and bound >= 0.0):
            raise DomainError(f"error bound must be finite and nonnegative, got {bound!r}")
        self.abs_error_bound = bound
        return self

    def __repr__(self):
        return f"SpecialValue({float(self)!r}, abs_error_bound={self.abs_error_bound:.3g})"


def erf(x):
    """Error function, odd, with |error| a few ulps.

    Args:
        x: any real.

    Returns:
        SpecialValue within a couple of ulps of erf(x); |erf| <= 1 so the
        bound is stated absolutely.
    """
    return SpecialValue(math.erf(x), 4.0 * _EPS)


def erfc(x):
    """Complementary error function, computed without cancellation.

    Full relative accuracy is kept for large x where 1 - erf(x) would lose
    every digit.
    """
    v = math.erfc(x)
    return SpecialValue(v, 8.0 * _EPS * abs(v) + 1e-300)


def upper_gamma(s, x):
    """Upper incomplete gamma integral from x to infinity of t^(s-1) e^(-t).

    Args:
        s: shape, must be positive.
        x: lower endpoint, must be nonnegative.

    Returns:
        SpecialValue with relative error around 1e-13.

    Raises:
        DomainError: s <= 0 or x < 0.
    """
    if not s > 0:
        raise DomainError(f"upper_gamma needs s > 0, got s={s}")
    if x < 0:
        raise DomainError(f"upper_gamma needs x >= 0, got x={x}")
    v = float(_sp.gammaincc(s, x)) * math.gamma(s)
    return SpecialValue(v, 5e-13 * abs(v) + 1e-300)


def _beta_prefactor(a, ba):
    # Gamma(a+ba) / (Gamma(a) Gamma(ba)) through logs to dodge overflow
    return math.exp(math.lgamma(a + ba) - math.lgamma(a) - math.lgamma(ba))


def kummer_j(a, b, x, tol=1e-12):
    """Regular confluent solution from its Euler integral on b > a > 0.

    Evaluates the normalized integral of e^(xt) t^(a-1) (1-t)^(b-a-1) over
    [0,1]. The endpoint singularities are removed exactly: split at t = 1/2,
    substitute t = s^(1/a) on the left half and 1 - t = s^(1/(b-a)) on the
    right half, which turns both integrands smooth.

    Args:
        a: first parameter, 0 < a < b.
        b: second parameter.
        x: argument, any real.
        tol: absolute quadrature tolerance per half.

    Returns:
        SpecialValue which satisfies x y'' + (b - x) y' - a y = 0 and
        equals 1 at x = 0.

    Raises:
        DomainError: unless b > a > 0, where the integral representation
            holds.
    """
    if not (b > a > 0):
        raise DomainError(f"kummer_j needs b > a > 0, got a={a}, b={b}")
    ba = b - a

    def left(s):
        t = s ** (1.0 / a)
        return (1.0 / a) * (1.0 - t) ** (ba - 1.0) * math.exp(x * t)

    def right(s):
        t = 1.0 - s ** (1.0 / ba)
        return (1.0 / ba) * t ** (a - 1.0) * math.exp(x * t)

    i1 = quad.integrate_finite(left, 0.0, 0.5**a, tol=tol)
    i2 = quad.integrate_finite(right, 0.0, 0.5**ba, tol=tol)
    pre = _beta_prefactor(a, ba)
    v = pre * (i1.value + i2.value)
    bound = pre * (i1.abs_error_estimate + i2.abs_error_estimate) + 8.0 * _EPS * abs(v)
    return SpecialValue(v, bound)


def tricomi_u(a, b, z, tol=1e-12):
    """Decaying confluent solution from its Laplace integral, a > 0, z > 0.

    Evaluates (1/Gamma(a)) times the integral over [0, inf) of
    e^(-zt) t^(a-1) (1+t)^(b-a-1). The t^(a-1) endpoint singularity is
    removed by t = s^(1/a) on [0,1]; the far part is integrated in log form
    under an exponential-tail truncation.

    This is the solution of x y'' + (b - x) y' - a y = 0 that decays like
    z^(-a) as z grows, which is the branch the ruin formulas need.

    Args:
        a: first parameter, positive.
        b: second parameter, any real.
        z: argument, positive.
        tol: absolute quadrature tolerance per piece.

    Returns:
        SpecialValue.

    Raises:
        DomainError: a <= 0 or z <= 0.
    """
    if not (a > 0 and z > 0):
        raise DomainError(f"tricomi_u needs a > 0 and z > 0, got a={a}, z={z}")
    ba1 = b - a - 1.0

    def near(s):
        t = s ** (1.0 / a)
        return (1.0 / a) * math.exp(-z * t) * (1.0 + t) ** ba1

    def far(t):
        return math.exp(-z * t + (a - 1.0) * math.log(t) + ba1 * math.log1p(t))

    i1 = quad.integrate_finite(near, 0.0, 1.0, tol=tol)
    # claim only half the true decay rate so the polynomial factor in front
    # of e^(-zt) cannot defeat the truncation check
    i2 = quad.integrate_semi_infinite(far, 1.0, tail=quad.ExponentialTail(0.5 * z), tol=tol)
    pre = 1.0 / math.gamma(a)
    v = pre * (i1.value + i2.value)
    bound = pre * (i1.abs_error_estimate + i2.abs_error_estimate) + 8.0 * _EPS * abs(v)
    return SpecialValue(v, bound)
