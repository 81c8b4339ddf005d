"""Ruin probability: the general quadrature formula and a closed-form catalog.

The probability of ever hitting zero from initial wealth u is a ratio of two
integrals of the same positive function

    h(v) = (lam(v)/eta(v)) * exp(gamma*v - Hazard(v)),

namely psi(u) = integral of h over [u, inf) divided by the integral over
[0, inf). The general route evaluates both by adaptive quadrature under one
shared truncation point. The catalog route recognizes six intensity-to-cost
ratio shapes whose integrals reduce to error functions, incomplete gamma
integrals, or plain algebra, and is required to agree with the general route
to 1e-8.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from . import quad
from .errors import DomainError, ModelError, NoClosedFormError
from .functions import Affine, Constant, ExpScale, HyperbolicShift, PowerShift, SqrtShift
from .model import (
    _ratio_singular_at_zero,
    hazard_profile,
    integrability_check,
    intensity_ratio,
)

__all__ = [
    "RuinResult",
    "ruin_probability",
    "ruin_probability_closed",
    "solve_theta_star",
    "survival_weight_view",
]


@dataclass(frozen=True)
class RuinResult:
    """A ruin probability with provenance.

    Attributes:
        psi: the probability, in [0, 1].
        method: "quadrature" or "closed_form(<pattern id>)".
        error_estimate: nonnegative bound on the numerical error in psi.
    """

    psi: float
    method: str
    error_estimate: float

    def __post_init__(self):
        p = self.psi
        if not (0.0 <= p <= 1.0):
            if -1e-9 <= p <= 1.0 + 1e-9:
                object.__setattr__(self, "psi", min(1.0, max(0.0, p)))
            else:
                raise ModelError(f"computed psi = {p} is not a probability")


def _require_integrable(m):
    rep = integrability_check(m)
    if rep.integrable is True:
        return rep
    raise ModelError(
        "the ruin integral has infinite mass for this model, so the quadrature "
        "formula does not apply; if lambda is proportional to eta with "
        "mu * E[jump] > 1, use solve_theta_star for the exponential bound "
        "instead (divergence alone does not imply psi = 1). "
        f"Tail check: {rep.tail_kind}: {rep.note}"
    )


def _log_integrand(m):
    """log h(v), with -inf where the intensity vanishes."""
    prof = hazard_profile(m)

    def logh(v):
        r = float(prof.ratio(v))
        if r <= 0.0:
            return -math.inf
        return math.log(r) + float(prof.exponent(v))

    return logh


def _psi_by_quadrature(m, u, tol, drop, grow):
    """Shared-truncation evaluation of (tail integral, total integral).

    Algebraically decaying integrands are integrated in w = log(1+v)
    coordinates, where their tails become exponential; ratios with an
    inverse-square-root blowup at zero are integrated in s = sqrt(v)
    coordinates, which makes the integrand finite at the origin; everything
    else stays on the v axis. The truncation point is pushed out until the
    transformed log integrand falls `drop` nats below its observed peak,
    scanning by the factor `grow`.
    """
    rep = _require_integrable(m)
    logh = _log_integrand(m)
    prof = hazard_profile(m)

    if _ratio_singular_at_zero(m):
        # dv = 2s ds; 2s * ratio(s^2) is finite at s = 0
        to_v = lambda s: s * s

        def logg(s):
            r = 2.0 * s * float(prof.ratio(s * s))
            if not (r > 0.0) or not math.isfinite(r):
                return -math.inf
            return math.log(r) + float(prof.exponent(s * s))

        x_u = math.sqrt(u)
    elif rep.tail_kind == "algebraic":
        to_v = math.expm1
        logg = lambda w: logh(math.expm1(w)) + w
        x_u = math.log1p(u)
    else:
        to_v = float
        logg = logh
        x_u = u

    scan_hi = max(2.0 * x_u, 1.0) + 5.0
    grid = np.linspace(1e-9, scan_hi, 64)
    peak = max(logg(float(x)) for x in grid)

    x_cut = scan_hi
    while logg(x_cut) > peak - drop:
        x_cut *= grow
        if to_v(x_cut) > 1e60:
            raise ModelError(
                "could not find a truncation point: the ruin integrand decays "
                "too slowly to resolve (tail power barely above 1)"
            )

    def g(x):
        lg = logg(x)
        return math.exp(lg) if lg > -700.0 else 0.0

    total = quad.integrate_finite(g, 0.0, x_cut, tol=tol)
    if u == 0.0:
        tail = total
    else:
        tail = quad.integrate_finite(g, x_u, x_cut, tol=tol)

    # the discarded tail beyond x_cut is common to both integrals; bound it
    # by one local decay estimate and fold it into the error, not the value
    g_cut = g(x_cut)
    if g_cut > 0.0:
        rate = logg(x_cut) - logg(x_cut + 0.5)
        tail_bound = g_cut / max(2.0 * rate, 1e-3)
    else:
        tail_bound = 0.0
    return tail.value, total.value, tail.abs_error_estimate, total.abs_error_estimate, tail_bound


def ruin_probability(m, u, tol=1e-12):
    """Probability of ruin from wealth u, by the general quadrature formula.

    Args:
        m: the model; its ruin integrand must have finite mass.
        u: initial wealth, nonnegative.
        tol: absolute quadrature tolerance for each integral.

    Returns:
        RuinResult with method "quadrature".

    Raises:
        DomainError: u < 0.
        ModelError: the integrability check fails or is inconclusive.
    """
    if u < 0:
        raise DomainError(f"wealth must be nonnegative, got {u}")
    n, d, en, ed, tail = _psi_by_quadrature(m, float(u), tol, drop=46.0, grow=1.5)
    psi = n / d
    err = (en + psi * ed + tail * (1.0 - psi)) / d
    return RuinResult(psi, "quadrature", err)


def survival_weight_view(m, u, tol=1e-11):
    """The two expectations whose ratio is the ruin probability.

    The ruin formula can be read as E[e^(gamma*V); V >= u] / E[e^(gamma*V)]
    for a random level V with density (lam/eta) e^(-Hazard). This evaluates
    both expectations under a truncation chosen independently from the one
    ruin_probability uses, so the pair serves as a cross-check.

    Returns:
        (tail_expectation, total_expectation).
    """
    if u < 0:
        raise DomainError(f"wealth must be nonnegative, got {u}")
    n, d, _, _, _ = _psi_by_quadrature(m, float(u), tol, drop=55.0, grow=1.8)
    return n, d


def _catalog_ratio(m):
    """The collapsed ratio with degenerate shape parameters normalized away."""
    r = intensity_ratio(m)
    if r is None:
        return None
    if isinstance(r, Affine) and r.b == 0.0:
        return Constant(r.a)
    if isinstance(r, PowerShift):
        if r.beta == 0.0:
            return Constant(r.gamma0 + r.alpha)
        if r.alpha == 0.0:
            return Constant(r.gamma0)
    if isinstance(r, (SqrtShift, HyperbolicShift)) and r.beta == 0.0:
        return Constant(r.alpha)
    if isinstance(r, ExpScale) and r.k == 0.0:
        return Constant(r.mu)
    return r


def _psi_constant_ratio(mu, gamma):
    def psi(u):
        return math.exp(-(mu - gamma) * u), 4e-16

    return psi


def _psi_affine_ratio(a, b, gamma):
    # exponent gamma*v - a*v - b*v^2/2 completes the square at s = v + (a-gamma)/b
    shift = (a - gamma) / b
    c1 = gamma * math.sqrt(math.pi / (2.0 * b))

    def weight(s):
        return c1 * math.erfc(math.sqrt(b / 2.0) * s) + math.exp(-b * s * s / 2.0)

    w0 = weight(shift)

    def psi(u):
        v = weight(u + shift) / w0
        return v, 8e-16 * (1.0 + v)

    return psi


def _psi_sqrt_ratio(alpha, beta, gamma):
    # tail(u) = e^{-k u - 2 beta sqrt(u)} [alpha/k - c * erfcx(sqrt(k) sqrt(u) + beta/sqrt(k))]
    # with k = alpha - gamma; erfcx keeps the e^{beta^2/k} factor implicit
    k = alpha - gamma
    c = gamma * beta * math.sqrt(math.pi) * k**-1.5

    def bracket(u):
        arg = math.sqrt(k) * math.sqrt(u) + beta / math.sqrt(k)
        return alpha / k - c * float(_sp.erfcx(arg))

    b0 = bracket(0.0)

    def psi(u):
        v = math.exp(-k * u - 2.0 * beta * math.sqrt(u)) * bracket(u) / b0
        return v, 1e-14 * (1.0 + v)

    return psi


def _psi_power_ratio(alpha, beta, gamma):
    from .specfun import upper_gamma

    q = 1.0 / (beta + 1.0)
    c = q * ((beta + 1.0) / alpha) ** q
    g_full = upper_gamma(q, 0.0)
    denom = 1.0 + gamma * c * float(g_full)

    def psi(u):
        t = alpha * u ** (beta + 1.0) / (beta + 1.0)
        g = upper_gamma(q, t)
        v = (math.exp(-t) + gamma * c * float(g)) / denom
        err = gamma * c * (g.abs_error_bound + g_full.abs_error_bound) / denom + 4e-16
        return v, err

    return psi


def _psi_hyperbolic_descending(alpha, beta, gamma):
    from .specfun import upper_gamma

    k = alpha - gamma
    pre = gamma * math.exp(k) * k ** -(beta + 1.0)

    def tail(u):
        g = upper_gamma(beta + 1.0, k * (1.0 + u))
        return (1.0 + u) ** beta * math.exp(-k * u) + pre * float(g), pre * g.abs_error_bound

    t0, e0 = tail(0.0)

    def psi(u):
        tu, eu = tail(u)
        v = tu / t0
        return v, (eu + v * e0) / t0 + 4e-16

    return psi


def _psi_hyperbolic_critical(beta, gamma):
    denom = gamma + beta - 1.0

    def psi(u):
        v = (1.0 + u) ** -beta * (gamma * (1.0 + u) + beta - 1.0) / denom
        return v, 4e-16 * (1.0 + v)

    return psi


def _match_catalog(m):
    """(pattern id, psi(u) -> (value, error)) for a recognized ratio, else None."""
    r = _catalog_ratio(m)
    gamma = m.gamma
    if r is None:
        return None
    if isinstance(r, Constant):
        if r.c > gamma:
            return "constant_ratio", _psi_constant_ratio(r.c, gamma)
        return None
    if isinstance(r, Affine) and r.b > 0.0:
        return "affine_ratio", _psi_affine_ratio(r.a, r.b, gamma)
    if isinstance(r, SqrtShift) and r.beta > 0.0 and r.alpha > gamma:
        return "sqrt_ratio", _psi_sqrt_ratio(r.alpha, r.beta, gamma)
    if (
        isinstance(r, PowerShift)
        and r.beta > 0.0
        and r.alpha > 0.0
        and math.isclose(r.gamma0, gamma, rel_tol=1e-12)
    ):
        return "power_ratio", _psi_power_ratio(r.alpha, r.beta, gamma)
    if isinstance(r, HyperbolicShift) and r.sign == -1:
        if r.alpha > gamma and r.alpha > r.beta > 1.0:
            return "hyperbolic_descending", _psi_hyperbolic_descending(r.alpha, r.beta, gamma)
        return None
    if isinstance(r, HyperbolicShift) and r.sign == 1:
        if math.isclose(r.alpha, gamma, rel_tol=1e-12) and r.beta > 1.0:
            return "hyperbolic_critical", _psi_hyperbolic_critical(r.beta, gamma)
        return None
    return None


def ruin_probability_closed(m, u):
    """Ruin probability via the closed-form catalog.

    Recognized intensity-to-cost ratio shapes, writing r = lam/eta:
        constant_ratio          r = mu > gamma
        affine_ratio            r = a + b*u, b > 0
        sqrt_ratio              r = alpha + beta/sqrt(u), alpha > gamma
        power_ratio             r = alpha*u^beta + gamma
        hyperbolic_descending   r = alpha - beta/(1+u), alpha > gamma,
                                alpha > beta > 1
        hyperbolic_critical     r = gamma + beta/(1+u), beta > 1

    Raises:
        DomainError: u < 0.
        NoClosedFormError: no pattern matches; use ruin_probability.
    """
    if u < 0:
        raise DomainError(f"wealth must be nonnegative, got {u}")
    hit = _match_catalog(m)
    if hit is None:
        raise NoClosedFormError(
            "the intensity-to-cost ratio matches no closed-form pattern; "
            "use the general routine ruin_probability"
        )
    pattern, psi = hit
    value, err = psi(float(u))
    return RuinResult(value, f"closed_form({pattern})", err)


def solve_theta_star(mu, jump_mgf, jump_mean, tol=1e-12):
    """Negative root of -theta + mu*(E[e^(theta*c)] - 1) for proportional models.

    When lam = mu * eta the ruin probability is exp(theta* u) for the unique
    negative root theta*, valid for any jump law with mu * E[c] > 1, not just
    exponential jumps.

    Args:
        mu: proportionality constant lam/eta, positive.
        jump_mgf: theta -> E[e^(theta*c)], needed only on theta <= 0 where it
            is finite for any nonnegative jump.
        jump_mean: E[c], positive.
        tol: bisection interval width at termination.

    Returns:
        theta* < 0.

    Raises:
        DomainError: mu * jump_mean <= 1 (no negative root is guaranteed).
    """
    if not (mu > 0 and jump_mean > 0):
        raise DomainError("mu and jump_mean must be positive")
    if not mu * jump_mean > 1.0:
        raise DomainError(
            f"need mu * E[c] > 1 for a negative root, got {mu * jump_mean}"
        )

    def F(theta):
        return -theta + mu * (jump_mgf(theta) - 1.0)

    # F is convex with F(0) = 0, F'(0) > 0, F -> +inf at -inf: walk left
    # until F turns positive, then bisect
    lo = -1.0
    while F(lo) <= 0.0:
        lo *= 2.0
        if lo < -1e9:
            raise DomainError("no sign change found; jump_mgf looks inconsistent")
    hi = lo / 2.0
    while F(hi) >= 0.0:
        hi /= 2.0
        if hi > -1e-14:
            raise DomainError("root collapsed to 0; check mu * E[c] > 1")
    # invariant: F(lo) > 0 > F(hi), lo < hi < 0
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if F(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
