"""Model objects: cost rate, jump intensity, jump-rate parameter.

A model is the triple (eta, lam, gamma). The ruin formulas only ever see
the intensity-to-cost ratio lam/eta and its running integral (the
cumulative hazard along the decaying flow), so this module also houses the
machinery that recognizes when that ratio collapses to a single parametric
family and when the ruin integrand has an integrable tail.
"""

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import quad
from .errors import ModelError, ParseError
from .functions import (
    Affine,
    Constant,
    ExpScale,
    HyperbolicShift,
    PowerShift,
    SqrtShift,
    StateFunction,
    Tabulated,
    function_from_spec,
)

__all__ = [
    "DualRiskModel",
    "HazardProfile",
    "IntegrabilityReport",
    "hazard_profile",
    "cumulative_hazard",
    "intensity_ratio",
    "integrability_check",
    "parse_model_spec",
    "serialize_model_spec",
]


def _eta_positive_on_positive_axis(eta):
    """Reject cost functions that vanish somewhere on u > 0."""
    if isinstance(eta, Constant):
        return eta.c > 0
    if isinstance(eta, Affine):
        return eta.a > 0 or eta.b > 0
    if isinstance(eta, PowerShift):
        return eta.gamma0 > 0 or (eta.alpha > 0 and eta.beta > 0) or (eta.beta == 0 and eta.alpha > 0)
    if isinstance(eta, SqrtShift):
        return eta.alpha > 0 or eta.beta > 0
    if isinstance(eta, HyperbolicShift):
        if eta.sign == 1:
            return eta.alpha > 0 or eta.beta > 0
        return eta.alpha > 0
    if isinstance(eta, ExpScale):
        return eta.mu > 0
    if isinstance(eta, Tabulated):
        pts = eta.params()["points"]
        return all(v > 0 for u, v in pts if u > 0) and any(v > 0 for _, v in pts)
    return True


@dataclass(frozen=True)
class DualRiskModel:
    """Wealth decays at rate eta(u) and receives Exp(gamma) jumps at rate lam(u)."""

    eta: StateFunction
    lam: StateFunction
    gamma: float

    def __post_init__(self):
        if not isinstance(self.eta, StateFunction) or not isinstance(self.lam, StateFunction):
            raise ModelError("eta and lambda must be state functions")
        g = float(self.gamma)
        if not (math.isfinite(g) and g > 0):
            raise ModelError(f"gamma must be positive, got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)
        if not _eta_positive_on_positive_axis(self.eta):
            raise ModelError("eta must be positive for all u > 0")

    @property
    def differentiable(self):
        return self.eta.differentiable and self.lam.differentiable


@dataclass(frozen=True)
class HazardProfile:
    """The ratio lam/eta, its integral from 0, and the ruin-integrand exponent.

    exponent(v) = gamma*v - cumulative(v), grouped so the leading gamma*v
    terms cancel analytically instead of in floating point; the naive
    difference loses every digit in the marginal cases where the ratio tends
    to gamma and v must be pushed far out.
    """

    ratio: object
    cumulative: object
    exponent: object
    analytic: bool


def _zero_behavior(f):
    """(value, local power) of a family as u -> 0+, value possibly inf."""
    if isinstance(f, Constant):
        return f.c, 0.0
    if isinstance(f, Affine):
        if f.a > 0:
            return f.a, 0.0
        return (0.0, 1.0) if f.b > 0 else (0.0, math.inf)
    if isinstance(f, PowerShift):
        if f.gamma0 > 0 or f.beta == 0:
            return f.gamma0 + (f.alpha if f.beta == 0 else 0.0), 0.0
        return (0.0, f.beta) if f.alpha > 0 else (0.0, math.inf)
    if isinstance(f, SqrtShift):
        return (math.inf, -0.5) if f.beta > 0 else (f.alpha, 0.0)
    if isinstance(f, HyperbolicShift):
        v0 = f.alpha + f.sign * f.beta
        if v0 > 0:
            return v0, 0.0
        return 0.0, 1.0
    if isinstance(f, ExpScale):
        return f.mu, 0.0
    if isinstance(f, Tabulated):
        pts = f.params()["points"]
        u0, v0 = pts[0]
        if v0 > 0 or u0 > 0:
            return v0, 0.0
        return 0.0, 1.0
    raise ModelError(f"unknown family {f!r}")


def _check_ratio_integrable_at_zero(m):
    lam0, p_lam = _zero_behavior(m.lam)
    eta0, p_eta = _zero_behavior(m.eta)
    if eta0 == 0.0 or lam0 == math.inf:
        # ratio behaves like u**(p_lam - p_eta) near 0; the integral from 0
        # exists iff that exponent stays above -1
        if p_lam - p_eta <= -1.0:
            raise ModelError(
                "lambda/eta is not integrable at u = 0 (the cost rate vanishes too "
                "fast relative to the intensity); the cumulative hazard diverges"
            )


def _ratio_singular_at_zero(m):
    """True when lam/eta blows up like an inverse power as u -> 0+."""
    _, p_lam = _zero_behavior(m.lam)
    _, p_eta = _zero_behavior(m.eta)
    return p_lam - p_eta < 0.0


def _proportionality(lam, eta):
    """mu with lam == mu * eta when both live in one family, else None."""

    def ratio_of(pairs):
        # pairs of (lam_param, eta_param); all nonzero eta params must give
        # the same quotient and zero eta params need zero lam params
        mu = None
        for lp, ep in pairs:
            if ep == 0.0:
                if lp != 0.0:
                    return None
                continue
            q = lp / ep
            if mu is None:
                mu = q
            elif not math.isclose(mu, q, rel_tol=1e-12):
                return None
        return mu

    if isinstance(lam, Constant) and isinstance(eta, Constant):
        return ratio_of([(lam.c, eta.c)])
    if isinstance(lam, Affine) and isinstance(eta, Affine):
        return ratio_of([(lam.a, eta.a), (lam.b, eta.b)])
    if isinstance(lam, PowerShift) and isinstance(eta, PowerShift) and lam.beta == eta.beta:
        return ratio_of([(lam.alpha, eta.alpha), (lam.gamma0, eta.gamma0)])
    if isinstance(lam, SqrtShift) and isinstance(eta, SqrtShift):
        return ratio_of([(lam.alpha, eta.alpha), (lam.beta, eta.beta)])
    if (
        isinstance(lam, HyperbolicShift)
        and isinstance(eta, HyperbolicShift)
        and lam.sign == eta.sign
    ):
        return ratio_of([(lam.alpha, eta.alpha), (lam.beta, eta.beta)])
    if isinstance(lam, ExpScale) and isinstance(eta, ExpScale) and lam.k == eta.k:
        return ratio_of([(lam.mu, eta.mu)])
    return None


def _shifted_antiderivative(r, gamma):
    """v -> integral over [0, v] of (r(x) - gamma) dx, with stable grouping.

    Each family's antiderivative is written with the gamma*v part subtracted
    term by term so that ratios of the form gamma + correction keep full
    precision in the correction however large v gets.
    """
    if isinstance(r, Constant):
        return lambda v: (r.c - gamma) * v
    if isinstance(r, Affine):
        return lambda v: (r.a - gamma) * v + 0.5 * r.b * v * v
    if isinstance(r, PowerShift):
        if r.beta == 0.0:
            return lambda v: (r.gamma0 + r.alpha - gamma) * v
        p = r.beta + 1.0
        return lambda v: (r.gamma0 - gamma) * v + r.alpha * v**p / p
    if isinstance(r, SqrtShift):
        return lambda v: (r.alpha - gamma) * v + 2.0 * r.beta * np.sqrt(v)
    if isinstance(r, HyperbolicShift):
        return lambda v: (r.alpha - gamma) * v + r.sign * r.beta * np.log1p(v)
    if isinstance(r, ExpScale):
        return lambda v: r.antiderivative(v) - gamma * v
    if isinstance(r, Tabulated):
        knots = r.params()["points"]
        u_end, c_end = knots[-1]
        a_end = float(r.antiderivative(u_end))

        def shifted(v):
            if np.ndim(v):
                v = np.asarray(v, dtype=float)
                inside = r.antiderivative(np.minimum(v, u_end)) - gamma * np.minimum(v, u_end)
                beyond = np.where(v > u_end, (c_end - gamma) * (v - u_end), 0.0)
                return inside + beyond
            if v <= u_end:
                return float(r.antiderivative(v)) - gamma * v
            return (a_end - gamma * u_end) + (c_end - gamma) * (v - u_end)

        return shifted
    raise ModelError(f"unknown family {r!r}")


def intensity_ratio(m):
    """lam/eta as a StateFunction when it collapses to one family, else None."""
    if isinstance(m.eta, Constant) and m.eta.c > 0:
        return m.lam.scaled(1.0 / m.eta.c)
    mu = _proportionality(m.lam, m.eta)
    if mu is not None:
        return Constant(mu)
    if isinstance(m.lam, ExpScale) and isinstance(m.eta, ExpScale) and m.eta.mu > 0:
        return ExpScale(m.lam.mu / m.eta.mu, m.lam.k - m.eta.k)
    if isinstance(m.lam, Constant) and isinstance(m.eta, ExpScale) and m.eta.mu > 0:
        return ExpScale(m.lam.c / m.eta.mu, -m.eta.k)
    return None


@lru_cache(maxsize=128)
def hazard_profile(m):
    """Ratio and cumulative hazard for a model, closed-form when possible.

    The cumulative hazard is the integral of lam/eta from 0. Closed forms
    cover every case where the ratio itself is a single family; otherwise an
    accumulating adaptive quadrature backs the callable, with a square-root
    substitution when the ratio has an inverse-square-root singularity at 0.
    """
    _check_ratio_integrable_at_zero(m)
    lam, eta = m.lam, m.eta
    gamma = m.gamma

    ratio_sf = intensity_ratio(m)
    if ratio_sf is not None:
        shifted = _shifted_antiderivative(ratio_sf, gamma)
        return HazardProfile(
            ratio=lambda v: ratio_sf(v),
            cumulative=lambda v: ratio_sf.antiderivative(v),
            exponent=lambda v: -shifted(v),
            analytic=True,
        )

    def ratio(v):
        with np.errstate(divide="ignore", invalid="ignore"):
            return lam(v) / eta(v)

    eta0, _ = _zero_behavior(eta)
    sqrt_singular = isinstance(lam, SqrtShift) and lam.beta > 0 and eta0 > 0
    if sqrt_singular:
        # substitute w = s*s to remove the 1/sqrt(w) endpoint singularity
        cache = quad.AntiderivativeCache(lambda s: 2.0 * s * ratio(s * s), tol=1e-12)
        cumulative = lambda v: cache.value(math.sqrt(v))
        shift_cache = quad.AntiderivativeCache(
            lambda s: 2.0 * s * (gamma - ratio(s * s)), tol=1e-12
        )
        exponent = lambda v: shift_cache.value(math.sqrt(v))
    else:
        cache = quad.AntiderivativeCache(ratio, tol=1e-12)
        cumulative = cache.value
        shift_cache = quad.AntiderivativeCache(lambda v: gamma - ratio(v), tol=1e-12)
        exponent = shift_cache.value
    return HazardProfile(ratio=ratio, cumulative=cumulative, exponent=exponent, analytic=False)


def cumulative_hazard(m, v):
    """Integral of lam/eta over [0, v].

    Raises:
        ModelError: the ratio is not integrable at 0.
        DomainError-like ModelError for v < 0.
    """
    v_min = np.min(v) if np.ndim(v) else v
    if v_min < 0:
        raise ModelError(f"cumulative hazard needs v >= 0, got {v_min}")
    prof = hazard_profile(m)
    if prof.analytic:
        return prof.cumulative(v)
    if np.ndim(v) == 0:
        return float(prof.cumulative(float(v)))
    return np.array([float(prof.cumulative(float(x))) for x in np.asarray(v).ravel()]).reshape(
        np.shape(v)
    )


@dataclass(frozen=True)
class IntegrabilityReport:
    """Outcome of the tail test for the ruin integrand (lam/eta)*exp(gamma*v - hazard).

    integrable is None when the test is inconclusive (the tail exponent
    vanishes without a usable algebraic correction). tail_kind is one of
    'exponential', 'algebraic', 'stretched', 'divergent', 'inconclusive';
    tail_rate is the eventual exponential decay rate of the integrand when
    finite, and algebraic_power the polynomial decay power when the
    exponential rate is exactly zero.
    """

    integrable: object
    tail_kind: str
    tail_rate: float = None
    algebraic_power: float = None
    note: str = ""

    def __bool__(self):
        return self.integrable is True


def _ratio_tail_limit(m):
    """Limit of lam(v)/eta(v) as v -> inf, possibly 0 or inf."""
    (lk, lrate_or_deg, lc) = m.lam.growth()
    (ek, erate_or_deg, ec) = m.eta.growth()
    lrate = lrate_or_deg if lk == "exp" else 0.0
    erate = erate_or_deg if ek == "exp" else 0.0
    if lrate != erate:
        return math.inf if lrate > erate else 0.0
    ldeg = lrate_or_deg if lk == "poly" else 0.0
    edeg = erate_or_deg if ek == "poly" else 0.0
    if ldeg != edeg:
        return math.inf if ldeg > edeg else 0.0
    if ec == 0.0:
        return math.inf
    return lc / ec


def integrability_check(m):
    """Decide whether the ruin integrand has finite mass on [0, inf).

    The integrand is (lam/eta) * exp(gamma*v - hazard(v)); it has finite
    mass iff gamma - lam/eta stays negative in the tail, with the marginal
    case gamma == limit decided by the polynomial correction v*(ratio-gamma).
    """
    gamma = m.gamma
    r_inf = _ratio_tail_limit(m)
    margin = 1e-12 * gamma

    if r_inf > gamma + margin:
        rate = r_inf - gamma if math.isfinite(r_inf) else math.inf
        return IntegrabilityReport(
            True,
            "exponential",
            tail_rate=rate,
            note=f"tail exponent gamma - lam/eta tends to {gamma - r_inf:.6g}",
        )
    if r_inf < gamma - margin:
        return IntegrabilityReport(
            False,
            "divergent",
            tail_rate=r_inf - gamma,
            note=(
                "the integrand grows like exp((gamma - lam/eta)*v) with positive "
                "exponent; the ruin integral diverges"
            ),
        )

    # marginal case: exponential rate exactly zero; look at v*(ratio - gamma)
    if isinstance(m.lam, SqrtShift) and isinstance(m.eta, Constant):
        # ratio = gamma + beta'/sqrt(v): hazard grows by 2*beta'*sqrt(v), a
        # stretched-exponential integrand, always integrable when beta' > 0
        if m.lam.beta > 0:
            return IntegrabilityReport(True, "stretched", note="sqrt-type subexponential tail")

    ratio_sf = intensity_ratio(m)
    power = None
    if isinstance(ratio_sf, HyperbolicShift):
        power = ratio_sf.sign * ratio_sf.beta
    elif isinstance(ratio_sf, Constant):
        power = 0.0
    else:
        # sample v*(ratio - gamma) far out; stable values decide the power
        prof = hazard_profile(m)
        samples = [v * (float(prof.ratio(v)) - gamma) for v in (1e4, 1e6, 1e8)]
        if all(math.isfinite(s) for s in samples) and (
            abs(samples[-1] - samples[-2]) <= 1e-3 * (1 + abs(samples[-1]))
        ):
            power = samples[-1]
    if power is None:
        return IntegrabilityReport(
            None,
            "inconclusive",
            note="tail exponent vanishes and no algebraic correction could be identified",
        )
    if power > 1 + 1e-9:
        return IntegrabilityReport(
            True,
            "algebraic",
            algebraic_power=power,
            note=f"integrand decays like v**(-{power:.6g})",
        )
    if power < 1 - 1e-9:
        return IntegrabilityReport(
            False,
            "divergent",
            algebraic_power=power,
            note=f"integrand decays like v**(-{power:.6g}), which has infinite mass",
        )
    return IntegrabilityReport(
        None,
        "inconclusive",
        algebraic_power=power,
        note="tail power is 1 to within tolerance; the test cannot decide",
    )


def parse_model_spec(text):
    """Parse a model-spec JSON document into a validated model.

    Accepts the document text (or an already-decoded dict). The schema is
    {"eta": {...}, "lambda": {...}, "gamma": number}; unknown fields are
    rejected at every level.
    """
    if isinstance(text, (bytes, str)):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"line {e.lineno} column {e.colno}: {e.msg}") from None
    else:
        obj = text
    if not isinstance(obj, dict):
        raise ParseError(f"model spec must be a JSON object, got {type(obj).__name__}")
    required = {"eta", "lambda", "gamma"}
    extra = set(obj) - required
    if extra:
        raise ParseError(f"unknown top-level fields: {sorted(extra)}")
    missing = required - set(obj)
    if missing:
        raise ParseError(f"missing required fields: {sorted(missing)}")
    gamma = obj["gamma"]
    if not isinstance(gamma, (int, float)) or isinstance(gamma, bool):
        raise ParseError("field 'gamma': expected a number")
    if not gamma > 0:
        raise ParseError("field 'gamma': must be positive")
    eta = function_from_spec(obj["eta"], where="field 'eta'")
    lam = function_from_spec(obj["lambda"], where="field 'lambda'")
    return DualRiskModel(eta=eta, lam=lam, gamma=float(gamma))


def serialize_model_spec(m):
    """Inverse of parse_model_spec; emits a canonical JSON document."""
    doc = {"eta": m.eta.to_spec(), "lambda": m.lam.to_spec(), "gamma": m.gamma}
    return json.dumps(doc, indent=2)
