"""Ruin-time transforms: Laplace transform and expected ruin time.

``psi(u, delta) = E[exp(-delta*tau); tau < infinity]`` solves a linear
second-order equation in the starting wealth,

    ``lam*eta*f'' + [lam*eta' + lam^2 - gamma*eta*lam - lam'*eta
    + delta*lam]*f' - (gamma*lam + lam')*delta*f = 0``,

with ``psi = f(u)/f(0)`` for the bounded positive solution that decays at
infinity.  The general route integrates the Riccati form of this equation
backward from a far boundary, where the decaying solution is the
numerically stable one; a small catalog of intensity/cost families admits
closed forms, kept as independent cross-checks.  When the intensity is
``lam(0)*exp(-gamma*u)`` the zeroth-order coefficient vanishes
identically, the equation drops to first order, and both routes integrate
it directly.

The expected ruin time is computed for ruin-certain models from the
drain time of the drift plus a recovery-weighted excess,

    ``E[tau](u) = int_0^u dv/eta(v) + int_0^u h(v)*T(v) dv``,

where ``h(v) = (lam/eta)(v)*exp(gamma*v - hazard(v))`` and
``T(v) = int_v^inf exp(hazard(w) - gamma*w)/eta(w) dw``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError, ModelError, NoClosedFormError, NumericsError
from .functions import Affine, Constant, ExpScale, HyperbolicShift, PowerShift, SqrtShift
from .model import (
    DualRiskModel,
    _ratio_singular_at_zero,
    _ratio_tail_limit,
    hazard_profile,
    integrability_check,
)
from .quad import (
    AlgebraicTail,
    AntiderivativeCache,
    ExponentialTail,
    integrate_finite,
    integrate_semi_infinite,
    solve_ivp,
)
from .specfun import tricomi_u

__all__ = [
    "LaplaceQuery",
    "ExpectedRuinQuery",
    "ruin_time_laplace",
    "ruin_time_laplace_closed",
    "expected_ruin_time",
]


def _require_differentiable(m: DualRiskModel) -> None:
    if not (m.lam.differentiable and m.eta.differentiable):
        raise ModelError(
            "ruin-time transforms need continuously differentiable intensity "
            "and cost families; tabulated functions are not supported"
        )


@dataclass(frozen=True)
class LaplaceQuery:
    """Discounted ruin query psi(u, delta) = E[exp(-delta*tau); tau < inf].

    Attributes:
        model: Dual risk model with differentiable parametric families.
        u: Starting wealth, nonnegative.
        delta: Discount rate, strictly positive.
    """

    model: DualRiskModel
    u: float
    delta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.u) and self.u >= 0.0):
            raise DomainError(f"wealth must be finite and nonnegative, got {self.u}")
        if not (math.isfinite(self.delta) and self.delta > 0.0):
            raise DomainError(f"discount rate must be positive, got {self.delta}")
        _require_differentiable(self.model)


@dataclass(frozen=True)
class ExpectedRuinQuery:
    """Expected ruin time query for a ruin-certain model."""

    model: DualRiskModel
    u: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.u) and self.u >= 0.0):
            raise DomainError(f"wealth must be finite and nonnegative, got {self.u}")
        _require_differentiable(self.model)


# ---------------------------------------------------------------------------
# general route: backward Riccati shooting


def _coefficients(m: DualRiskModel, delta: float, x: float):
    lam = float(m.lam(x))
    lam_p = float(m.lam.derivative(x))
    eta = float(m.eta(x))
    eta_p = float(m.eta.derivative(x))
    second = lam * eta
    first = lam * eta_p + lam * lam - m.gamma * eta * lam - lam_p * eta + delta * lam
    zeroth = -(m.gamma * lam + lam_p) * delta
    return second, first, zeroth


def _rate_gap(m: DualRiskModel, delta: float, x: float) -> float:
    second, first, zeroth = _coefficients(m, delta, x)
    disc = first * first - 4.0 * second * zeroth
    if not (disc > 0.0 and math.isfinite(disc)):
        raise NumericsError(
            f"characteristic rates are complex near u={x:.6g}; no sign-definite "
            "decaying solution to shoot from"
        )
    return math.sqrt(disc) / second


def _decaying_rate(m: DualRiskModel, delta: float, x: float) -> float:
    second, first, zeroth = _coefficients(m, delta, x)
    disc = first * first - 4.0 * second * zeroth
    if not (disc >= 0.0 and math.isfinite(disc)):
        raise NumericsError(
            f"characteristic rates are complex near u={x:.6g}; no sign-definite "
            "decaying solution to shoot from"
        )
    return (-first - math.sqrt(disc)) / (2.0 * second)


def _far_boundary(m: DualRiskModel, delta: float, u: float) -> float:
    """Boundary far enough that the transversal mode contracts by ~e^45."""
    x = max(u, 1.0)
    runaway = x + 1e5
    folds = 0.0
    while folds < 45.0:
        gap = _rate_gap(m, delta, x)
        step = min(2.0, max(1e-3, 2.0 / gap))
        folds += _rate_gap(m, delta, x + 0.5 * step) * step
        x += step
        if x > runaway:
            raise NumericsError(
                "far boundary search ran away: the characteristic rate gap "
                f"stays near zero out to u={x:.3g} (delta too small for this model?)"
            )
    return x


def _is_critical_exp_decay(m: DualRiskModel) -> bool:
    return isinstance(m.lam, ExpScale) and abs(m.lam.k + m.gamma) <= 1e-9 * m.gamma


def _survivor_tail(m: DualRiskModel, delta: float):
    """Tail bound for exp(-int_0^v (lam+delta)/eta)/eta(v)."""
    kind, degree_or_rate, coeff = m.eta.growth()
    if kind == "exp":
        if degree_or_rate > 0.0:
            return ExponentialTail(0.5 * degree_or_rate)
        return ExponentialTail(1.0)
    # half rate so slowly varying factors cannot defeat the truncation check
    if degree_or_rate == 0:
        return ExponentialTail(0.5 * delta / coeff)
    if degree_or_rate == 1:
        return AlgebraicTail(1.0 + delta / coeff)
    return AlgebraicTail(float(degree_or_rate))


def _laplace_first_order(m: DualRiskModel, delta: float, u: float) -> float:
    """Exact route when the zeroth-order coefficient vanishes identically.

    The equation reduces to first order in f', giving
    ``f(u) = int_0^u exp(-int_0^v (lam+delta)/eta)/eta dv`` and
    ``psi = 1 - f(u)/f(inf)``.
    """
    survivor = AntiderivativeCache(
        lambda w: (float(m.lam(w)) + delta) / float(m.eta(w)), tol=1e-13
    )

    def integrand(v: float) -> float:
        return math.exp(-survivor.value(v)) / float(m.eta(v))

    head = integrate_finite(integrand, 0.0, u, tol=1e-12).value
    tail = integrate_semi_infinite(
        integrand, u, tol=1e-12, tail=_survivor_tail(m, delta)
    ).value
    return 1.0 - head / (head + tail)


def ruin_time_laplace(q: LaplaceQuery, rtol: float = 1e-11) -> float:
    """Laplace transform of the ruin time, psi(u, delta), in [0, 1].

    Integrates the Riccati form phi = f'/f of the ruin-time equation
    backward from a far boundary seeded with the decaying characteristic
    rate, then normalizes so only the ratio f(u)/f(0) matters.  When the
    zeroth-order coefficient vanishes identically (intensity proportional
    to exp(-gamma*u)) the equation is first order and is integrated
    exactly instead.

    Args:
        q: Query with model, wealth, and discount rate.
        rtol: Relative tolerance of the backward integration.

    Returns:
        psi(u, delta), clamped to [0, 1] only within 1e-9 of the bounds.

    Raises:
        NumericsError: If no sign-definite decaying solution can be
            tracked, with the diagnostics in the message.
        ModelError: If the model degenerates at the origin.
    """
    m, u, delta = q.model, q.u, q.delta
    if u == 0.0:
        return 1.0
    if _is_critical_exp_decay(m):
        return _laplace_first_order(m, delta, u)
    if float(m.lam(0.0)) <= 0.0 or float(m.eta(0.0)) <= 0.0:
        raise ModelError(
            "the ruin-time equation degenerates at u=0 when lam(0) or eta(0) "
            "vanishes; the shooting route needs both positive"
        )
    far = _far_boundary(m, delta, u)

    def field(x, y):
        phi = y[0]
        second, first, zeroth = _coefficients(m, delta, x)
        ratio_b = first / second
        ratio_c = zeroth / second
        return [-phi * phi - ratio_b * phi - ratio_c, phi]

    sol = solve_ivp(field, far, [_decaying_rate(m, delta, far), 0.0], 0.0,
                    rtol=rtol, atol=1e-13)
    log_at_u = float(sol(u)[1])
    log_at_zero = float(sol.y_end[1])
    psi = math.exp(log_at_u - log_at_zero)
    if not math.isfinite(psi) or psi < -1e-9 or psi > 1.0 + 1e-9:
        raise NumericsError(
            f"backward shooting produced psi={psi!r} outside [0,1] "
            f"(u={u}, delta={delta}, far boundary {far:.3g})"
        )
    return min(max(psi, 0.0), 1.0)


# ---------------------------------------------------------------------------
# closed-form catalog


def _flat_value(f):
    """Constant value of a state function, or None if it actually varies."""
    if isinstance(f, Constant):
        return f.c
    if isinstance(f, Affine) and f.b == 0.0:
        return f.a
    if isinstance(f, PowerShift):
        if f.beta == 0.0:
            return f.gamma0 + f.alpha
        if f.alpha == 0.0:
            return f.gamma0
    if isinstance(f, SqrtShift) and f.beta == 0.0:
        return f.alpha
    if isinstance(f, HyperbolicShift) and f.beta == 0.0:
        return f.alpha
    if isinstance(f, ExpScale) and f.k == 0.0:
        return f.mu
    return None


def _as_affine(f):
    """(intercept, slope) when the function is affine, else None."""
    if isinstance(f, Affine):
        return f.a, f.b
    flat = _flat_value(f)
    if flat is not None:
        return flat, 0.0
    return None


def _laplace_flat(lam: float, eta: float, gamma: float, delta: float, u: float) -> float:
    shift = lam - gamma * eta + delta
    rate = (-shift - math.sqrt(shift * shift + 4.0 * eta * gamma * delta)) / (2.0 * eta)
    return math.exp(rate * u)


def _laplace_affine_cost(
    lam: float, rho: float, mu: float, gamma: float, delta: float, u: float
) -> float:
    a = delta / mu
    b = (mu + lam + delta) / mu
    z_at = gamma * (rho + mu * u) / mu
    z_zero = gamma * rho / mu
    return float(tricomi_u(a, b, z_at)) / float(tricomi_u(a, b, z_zero))


def _laplace_exp_growth(
    mu: float, k: float, eta: float, gamma: float, delta: float, u: float
) -> float:
    # the discriminant is the perfect square (delta/eta + gamma + k)^2, so
    # the positive characteristic index is (gamma + k)/k exactly
    index = (gamma + k) / k
    a = 1.0 + delta / (eta * k)
    b = a + index
    scale = mu / (eta * k)

    def solution(x: float) -> float:
        z = scale * math.exp(k * x)
        return math.exp(index * k * x - z) * float(tricomi_u(a, b, z))

    return solution(u) / solution(0.0)


def ruin_time_laplace_closed(q: LaplaceQuery) -> float:
    """Closed-form psi(u, delta) for the cataloged family patterns.

    Patterns: constant intensity with affine cost (confluent
    hypergeometric in the cost argument, elementary when the cost is
    flat); intensity lam(0)*exp(-gamma*u) with any cost (first-order
    reduction); flat cost with exponentially growing intensity
    (confluent hypergeometric in exp(k*u)); and reciprocal-linear cost
    with intensity gamma*eta, whose confluent parameters always fall
    outside their validity region, so that pattern is answered by the
    general route with a warning.

    Raises:
        NoClosedFormError: If no cataloged pattern matches.
    """
    m, u, delta = q.model, q.u, q.delta
    gamma = m.gamma
    if _is_critical_exp_decay(m):
        if u == 0.0:
            return 1.0
        return _laplace_first_order(m, delta, u)

    flat_lam = _flat_value(m.lam)
    cost = _as_affine(m.eta)
    if flat_lam is not None and cost is not None:
        rho, mu = cost
        if mu == 0.0:
            if rho <= 0.0:
                raise ModelError("flat cost rate must be positive")
            return _laplace_flat(flat_lam, rho, gamma, delta, u)
        if rho > 0.0:
            return _laplace_affine_cost(flat_lam, rho, mu, gamma, delta, u)
        raise NoClosedFormError(
            "the affine-cost closed form needs eta(0) > 0"
        )

    flat_eta = _flat_value(m.eta)
    if flat_eta is not None and isinstance(m.lam, ExpScale) and m.lam.k > 0.0:
        return _laplace_exp_growth(m.lam.mu, m.lam.k, flat_eta, gamma, delta, u)

    if (
        isinstance(m.eta, HyperbolicShift)
        and m.eta.alpha == 0.0
        and m.eta.sign > 0
        and isinstance(m.lam, HyperbolicShift)
        and m.lam.alpha == 0.0
        and m.lam.sign > 0
        and abs(m.lam.beta - gamma * m.eta.beta) <= 1e-12 * max(1.0, m.lam.beta)
    ):
        # the confluent parameters for this pattern are a = 1/2 +
        # gamma^2/(2*delta*beta) and b = 1/2, so b > a > 0 never holds
        warnings.warn(
            "closed-form parameters fall outside their validity region "
            "(need b > a > 0); answering with the general shooting route",
            RuntimeWarning,
            stacklevel=2,
        )
        return ruin_time_laplace(q)

    raise NoClosedFormError(
        "no closed-form ruin-time pattern matches this intensity/cost pair"
    )


# ---------------------------------------------------------------------------
# expected ruin time


def _recovery_tail(m: DualRiskModel, report):
    """Tail bound for exp(hazard(w) - gamma*w)/eta(w)."""
    gamma = m.gamma
    r_inf = _ratio_tail_limit(m)
    if r_inf <= gamma * (1.0 - 1e-9):
        # half rate so slowly varying factors cannot defeat the check
        return ExponentialTail(0.5 * (gamma - r_inf))
    power = report.algebraic_power
    kind, degree_or_rate, _coeff = m.eta.growth()
    if power is not None and kind == "poly" and degree_or_rate - power > 1.0 + 1e-9:
        return AlgebraicTail(degree_or_rate - power)
    if power is not None and kind == "exp" and degree_or_rate > 0.0:
        return ExponentialTail(0.5 * degree_or_rate)
    raise ModelError(
        "the expected ruin time is infinite or indeterminate: the recovery "
        "weight decays too slowly to integrate"
    )


def expected_ruin_time(q: ExpectedRuinQuery) -> float:
    """Expected ruin time E[tau] for a ruin-certain model.

    Combines the drain time of the drift with the recovery-weighted
    excess spent above every level:

        ``E[tau](u) = int_0^u dv/eta(v) + int_0^u h(v)*T(v) dv``

    with ``h(v) = (lam/eta)(v)*exp(gamma*v - hazard(v))`` and
    ``T(v) = int_v^inf exp(hazard(w) - gamma*w)/eta(w) dw``.

    Raises:
        ModelError: If ruin is not almost sure (the expected ruin time is
            infinite), if certainty is indeterminate, or if the recovery
            weight cannot be integrated.
    """
    m, u = q.model, q.u
    if u == 0.0:
        return 0.0
    if float(m.eta(0.0)) <= 0.0:
        raise ModelError(
            "the drift cannot reach zero in finite time when eta(0) = 0"
        )
    report = integrability_check(m)
    if report.integrable is True:
        raise ModelError(
            "ruin is not almost sure for this model (the recovery weight has "
            "finite mass), so the expected ruin time is infinite"
        )
    if report.integrable is None:
        raise ModelError(f"ruin certainty is indeterminate: {report.note}")

    prof = hazard_profile(m)

    def recovery(w: float) -> float:
        return math.exp(-float(prof.exponent(w))) / float(m.eta(w))

    total = integrate_semi_infinite(
        recovery, 0.0, tol=1e-12, tail=_recovery_tail(m, report)
    ).value
    below = AntiderivativeCache(recovery, tol=1e-12)

    def weighted(v: float) -> float:
        remaining = total - below.value(v)
        if remaining <= 0.0:
            return 0.0
        return float(prof.ratio(v)) * math.exp(float(prof.exponent(v))) * remaining

    drain = integrate_finite(lambda v: 1.0 / float(m.eta(v)), 0.0, u, tol=1e-12).value
    if _ratio_singular_at_zero(m):
        # sqrt substitution keeps the integrand finite at the origin
        excess = integrate_finite(
            lambda s: 2.0 * s * weighted(s * s), 0.0, math.sqrt(u), tol=1e-11
        ).value
    else:
        excess = integrate_finite(weighted, 0.0, u, tol=1e-11).value
    return drain + excess
