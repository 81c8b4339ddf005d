"""Barrier-dividend statistics.

Wealth is driven down by the cost rate and up by jumps; when a jump carries
it above a barrier b the excess is paid out at once and the process restarts
at b. All quantities here reduce to the hitting-before-ruin probability

    phi(u, b) = f(u) / integral over c of gamma e^(-gamma c) f(b + c),

where f is the running integral of the ruin integrand h from zero. Because
jump overshoots are memoryless, each paid dividend is Exp(gamma) and the
number of payments is geometric, which gives every downstream statistic in
closed form once phi(u, b) and phi(b, b) are known.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

from . import quad
from .errors import DomainError, ModelError
from .model import DualRiskModel, _ratio_singular_at_zero, hazard_profile
from .ruin import _require_integrable

__all__ = [
    "DividendQuery",
    "DividendStats",
    "hitting_probability",
    "expected_single_dividend",
    "dividend_count_pmf",
    "total_dividends_laplace",
    "dividend_stats",
]


@dataclass(frozen=True)
class DividendQuery:
    """A barrier-dividend question: start at u, pay out above b.

    Attributes:
        model: the wealth model.
        u: initial wealth, nonnegative.
        b: barrier, strictly above u.
    """

    model: DualRiskModel
    u: float
    b: float

    def __post_init__(self):
        if not isinstance(self.model, DualRiskModel):
            raise ModelError("model must be a DualRiskModel")
        u, b = float(self.u), float(self.b)
        if not (b > u >= 0.0):
            raise DomainError(f"need b > u >= 0, got u={self.u}, b={self.b}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class DividendStats:
    """The standard summary of a barrier-dividend run.

    Attributes:
        phi_ub: probability of reaching the barrier before ruin from u.
        phi_bb: same probability restarted at the barrier itself.
        expected_single: mean of the first dividend payment, phi_ub / gamma.
        expected_count: mean number of payments, phi_ub / (1 - phi_bb).
        expected_total: mean of the summed payments.
    """

    phi_ub: float
    phi_bb: float
    expected_single: float
    expected_count: float
    expected_total: float


def _h_pieces(m):
    """(g, to_x) with f(v) = integral of g over [0, to_x(v)].

    For ratios with an inverse-square-root blowup at zero the integration
    runs in s = sqrt(v) coordinates where the integrand is finite.
    """
    prof = hazard_profile(m)

    if _ratio_singular_at_zero(m):

        def g(s):
            r = 2.0 * s * float(prof.ratio(s * s))
            if not (r > 0.0 and math.isfinite(r)):
                return 0.0
            e = float(prof.exponent(s * s))
            return r * math.exp(e) if e > -700.0 else 0.0

        return g, math.sqrt

    def g(v):
        r = float(prof.ratio(v))
        if r <= 0.0:
            return 0.0
        e = float(prof.exponent(v))
        return r * math.exp(e) if e > -700.0 else 0.0

    return g, float


@lru_cache(maxsize=512)
def _phi(m, u, b, tol=1e-11):
    """phi(u, b) with no ordering constraint (the recursion needs u = b)."""
    _require_integrable(m)
    g, to_x = _h_pieces(m)
    cache = quad.AntiderivativeCache(g, tol=tol)
    f_u = cache.value(to_x(u)) if u > 0.0 else 0.0
    denom = quad.integrate_exp_weighted_double(
        g, m.gamma, tol=tol, inner_limit=lambda c: to_x(b + c)
    )
    phi = f_u / denom.value
    if not 0.0 <= phi <= 1.0 + 1e-9:
        raise ModelError(f"hitting probability {phi} escaped [0, 1]")
    return min(phi, 1.0)


def hitting_probability(q):
    """Probability of touching the barrier before ruin.

    Returns:
        phi(u, b) in [0, 1]; zero exactly at u = 0.

    Raises:
        ModelError: the model fails the integrability test.
    """
    return _phi(q.model, q.u, q.b)


def expected_single_dividend(q):
    """Mean first dividend: the overshoot is Exp(gamma), so phi(u,b)/gamma."""
    return hitting_probability(q) / q.model.gamma


def dividend_count_pmf(q, n):
    """P(number of dividend payments = n).

    The count is zero with probability 1 - phi(u,b) and otherwise geometric
    with continuation probability phi(b,b).

    Args:
        q: the query.
        n: nonnegative integer.
    """
    if n != int(n) or n < 0:
        raise DomainError(f"count must be a nonnegative integer, got {n!r}")
    n = int(n)
    phi_ub = _phi(q.model, q.u, q.b)
    if n == 0:
        return 1.0 - phi_ub
    phi_bb = _phi(q.model, q.b, q.b)
    return phi_ub * phi_bb ** (n - 1) * (1.0 - phi_bb)


def total_dividends_laplace(q, theta):
    """E[e^(-theta * total dividends)].

    Each payment is an independent Exp(gamma) amount and the count is
    geometric, so the transform is elementary. Exactly 1 at theta = 0.

    Args:
        q: the query.
        theta: transform argument, nonnegative.
    """
    if theta < 0:
        raise DomainError(f"theta must be nonnegative, got {theta}")
    phi_ub = _phi(q.model, q.u, q.b)
    if theta == 0.0:
        return 1.0
    phi_bb = _phi(q.model, q.b, q.b)
    r = q.model.gamma / (q.model.gamma + theta)
    return 1.0 - phi_ub + phi_ub * (1.0 - phi_bb) * r / (1.0 - r * phi_bb)


def dividend_stats(q):
    """All standard dividend statistics for one query in a single object."""
    phi_ub = _phi(q.model, q.u, q.b)
    phi_bb = _phi(q.model, q.b, q.b)
    gamma = q.model.gamma
    if phi_bb >= 1.0:
        raise ModelError(
            "phi(b,b) reached 1 within numerical precision; the expected "
            "number of dividends is not finite at this barrier"
        )
    count = phi_ub / (1.0 - phi_bb)
    return DividendStats(
        phi_ub=phi_ub,
        phi_bb=phi_bb,
        expected_single=phi_ub / gamma,
        expected_count=count,
        expected_total=count / gamma,
    )
