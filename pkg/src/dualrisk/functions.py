"""Parametric state functions used for cost rates and jump intensities.

Every family evaluates to a finite nonnegative value on u > 0 and knows its
own antiderivative from zero, which is what the analytic formulas and the
simulator both consume. Parameters are validated at construction so that a
constructed object can be shared freely between threads.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelError, ParseError

__all__ = [
    "StateFunction",
    "Constant",
    "Affine",
    "PowerShift",
    "SqrtShift",
    "HyperbolicShift",
    "ExpScale",
    "Tabulated",
    "evaluate",
    "function_from_spec",
]


def _finite(name, value):
    value = float(value)
    if not np.isfinite(value):
        raise ModelError(f"{name} must be finite, got {value!r}")
    return value


def _nonneg(name, value):
    value = _finite(name, value)
    if value < 0:
        raise ModelError(f"{name} must be nonnegative, got {value}")
    return value


class StateFunction:
    """A nonnegative function of wealth with an analytic antiderivative.

    Subclasses implement ``__call__``, ``antiderivative`` (integral from 0),
    ``derivative``, and ``growth`` (leading behavior as u grows without
    bound, used by tail analyses). All instances are immutable.
    """

    family = "abstract"
    differentiable = True

    def __call__(self, u):
        raise NotImplementedError

    def antiderivative(self, v):
        """Integral of the function over [0, v]; accepts scalars or arrays."""
        raise NotImplementedError

    def derivative(self, u):
        raise NotImplementedError

    def growth(self):
        """Leading behavior at infinity as ('poly', degree, coeff) or ('exp', k, coeff)."""
        raise NotImplementedError

    def monotonicity(self):
        """'nondecreasing', 'nonincreasing', or 'unknown'."""
        raise NotImplementedError

    def scaled(self, factor):
        """The same function multiplied by a positive constant, in-family."""
        raise NotImplementedError

    def params(self):
        raise NotImplementedError

    def to_spec(self):
        return {"family": self.family, **self.params()}

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({inner})"


@dataclass(frozen=True, repr=False)
class Constant(StateFunction):
    c: float

    family = "constant"

    def __post_init__(self):
        object.__setattr__(self, "c", _nonneg("c", self.c))

    def __call__(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.c) if np.ndim(u) else self.c

    def antiderivative(self, v):
        return self.c * np.asarray(v, dtype=float) if np.ndim(v) else self.c * v

    def derivative(self, u):
        return np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0

    def growth(self):
        return ("poly", 0.0, self.c)

    def monotonicity(self):
        return "nondecreasing"

    def scaled(self, factor):
        return Constant(self.c * factor)

    def params(self):
        return {"c": self.c}


@dataclass(frozen=True, repr=False)
class Affine(StateFunction):
    """a + b*u."""

    a: float
    b: float

    family = "affine"

    def __post_init__(self):
        object.__setattr__(self, "a", _nonneg("a", self.a))
        object.__setattr__(self, "b", _nonneg("b", self.b))

    def __call__(self, u):
        return self.a + self.b * np.asarray(u, dtype=float) if np.ndim(u) else self.a + self.b * u

    def antiderivative(self, v):
        v = np.asarray(v, dtype=float) if np.ndim(v) else v
        return self.a * v + 0.5 * self.b * v * v

    def derivative(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.b) if np.ndim(u) else self.b

    def growth(self):
        if self.b > 0:
            return ("poly", 1.0, self.b)
        return ("poly", 0.0, self.a)

    def monotonicity(self):
        return "nondecreasing"

    def scaled(self, factor):
        return Affine(self.a * factor, self.b * factor)

    def params(self):
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True, repr=False)
class PowerShift(StateFunction):
    """alpha * u**beta + gamma0."""

    alpha: float
    beta: float
    gamma0: float

    family = "power_shift"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _nonneg("alpha", self.alpha))
        object.__setattr__(self, "beta", _nonneg("beta", self.beta))
        object.__setattr__(self, "gamma0", _nonneg("gamma0", self.gamma0))

    def __call__(self, u):
        u = np.asarray(u, dtype=float) if np.ndim(u) else u
        if self.beta == 0.0:
            # u**0 == 1 everywhere, including u == 0
            return self.alpha + self.gamma0 + 0.0 * u
        return self.alpha * np.power(u, self.beta) + self.gamma0

    def antiderivative(self, v):
        v = np.asarray(v, dtype=float) if np.ndim(v) else v
        if self.beta == 0.0:
            return (self.alpha + self.gamma0) * v
        p = self.beta + 1.0
        return self.alpha * np.power(v, p) / p + self.gamma0 * v

    def derivative(self, u):
        if self.beta == 0.0 or self.alpha == 0.0:
            return np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0
        u = np.asarray(u, dtype=float) if np.ndim(u) else u
        with np.errstate(divide="ignore"):
            return self.alpha * self.beta * np.power(u, self.beta - 1.0)

    def growth(self):
        if self.alpha > 0 and self.beta > 0:
            return ("poly", self.beta, self.alpha)
        return ("poly", 0.0, self.alpha * (self.beta == 0.0) + self.gamma0)

    def monotonicity(self):
        return "nondecreasing"

    def scaled(self, factor):
        return PowerShift(self.alpha * factor, self.beta, self.gamma0 * factor)

    def params(self):
        return {"alpha": self.alpha, "beta": self.beta, "gamma0": self.gamma0}


@dataclass(frozen=True, repr=False)
class SqrtShift(StateFunction):
    """alpha + beta / sqrt(u); singular at u = 0 when beta > 0."""

    alpha: float
    beta: float

    family = "sqrt_shift"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _nonneg("alpha", self.alpha))
        object.__setattr__(self, "beta", _nonneg("beta", self.beta))

    def __call__(self, u):
        u = np.asarray(u, dtype=float) if np.ndim(u) else u
        if self.beta == 0.0:
            return self.alpha + 0.0 * u
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.alpha + self.beta / np.sqrt(u)

    def antiderivative(self, v):
        # the 1/sqrt singularity is integrable; the closed form needs no split
        v = np.asarray(v, dtype=float) if np.ndim(v) else v
        return self.alpha * v + 2.0 * self.beta * np.sqrt(v)

    def derivative(self, u):
        u = np.asarray(u, dtype=float) if np.ndim(u) else u
        with np.errstate(divide="ignore"):
            return -0.5 * self.beta * np.power(u, -1.5)

    def growth(self):
        if self.alpha > 0:
            return ("poly", 0.0, self.alpha)
        return ("poly", -0.5, self.beta)

    def monotonicity(self):
        return "nonincreasing"

    def scaled(self, factor):
        return SqrtShift(self.alpha * factor, self.beta * factor)

    def params(self):
        return {"alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True, repr=False)
class HyperbolicShift(StateFunction):
    """alpha + sign * beta / (1 + u) with sign in {+1, -1}."""

    alpha: float
    beta: float
    sign: int

    family = "hyperbolic_shift"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _nonneg("alpha", self.alpha))
        object.__setattr__(self, "beta", _nonneg("beta", self.beta))
        if self.sign not in (1, -1):
            raise ModelError(f"sign must be +1 or -1, got {self.sign!r}")
        if self.sign == -1 and self.alpha < self.beta:
            raise ModelError(
                "descending hyperbolic shift needs alpha >= beta to stay nonnegative"
            )

    def __call__(self, u):
        u = np.asarray(u, dtype=float) if np.ndim(u) else u
        return self.alpha + self.sign * self.beta / (1.0 + u)

    def antiderivative(self, v):
        v = np.asarray(v, dtype=float) if np.ndim(v) else v
        return self.alpha * v + self.sign * self.beta * np.log1p(v)

    def derivative(self, u):
        u = np.asarray(u, dtype=float) if np.ndim(u) else u
        return -self.sign * self.beta / (1.0 + u) ** 2

    def growth(self):
        return ("poly", 0.0, self.alpha) if self.alpha > 0 else ("poly", -1.0, self.beta)

    def monotonicity(self):
        return "nonincreasing" if self.sign == 1 else "nondecreasing"

    def scaled(self, factor):
        return HyperbolicShift(self.alpha * factor, self.beta * factor, self.sign)

    def params(self):
        return {"alpha": self.alpha, "beta": self.beta, "sign": self.sign}


@dataclass(frozen=True, repr=False)
class ExpScale(StateFunction):
    """mu * exp(k*u). k may be negative (decaying intensities need it)."""

    mu: float
    k: float

    family = "exp_scale"

    def __post_init__(self):
        object.__setattr__(self, "mu", _nonneg("mu", self.mu))
        object.__setattr__(self, "k", _finite("k", self.k))

    def __call__(self, u):
        u = np.asarray(u, dtype=float) if np.ndim(u) else u
        return self.mu * np.exp(self.k * u)

    def antiderivative(self, v):
        v = np.asarray(v, dtype=float) if np.ndim(v) else v
        if self.k == 0.0:
            return self.mu * v
        return self.mu * np.expm1(self.k * v) / self.k

    def derivative(self, u):
        u = np.asarray(u, dtype=float) if np.ndim(u) else u
        return self.mu * self.k * np.exp(self.k * u)

    def growth(self):
        if self.k != 0.0 and self.mu > 0:
            return ("exp", self.k, self.mu)
        return ("poly", 0.0, self.mu)

    def monotonicity(self):
        return "nondecreasing" if self.k >= 0 else "nonincreasing"

    def scaled(self, factor):
        return ExpScale(self.mu * factor, self.k)

    def params(self):
        return {"mu": self.mu, "k": self.k}


class Tabulated(StateFunction):
    """Piecewise-linear interpolation of (u, value) pairs.

    The grid must be strictly increasing with at least two points. Queries
    beyond the grid use constant extrapolation of the end values. Tabulated
    curves are not differentiable; operations that need a derivative reject
    them.
    """

    family = "tabulated"
    differentiable = False

    def __init__(self, points):
        pts = [(float(u), float(v)) for u, v in points]
        if len(pts) < 2:
            raise ModelError("tabulated grid needs at least 2 points")
        us = np.array([p[0] for p in pts])
        vals = np.array([p[1] for p in pts])
        if not np.all(np.isfinite(us)) or not np.all(np.isfinite(vals)):
            raise ModelError("tabulated grid entries must be finite")
        if np.any(np.diff(us) <= 0):
            raise ModelError("tabulated grid must be strictly increasing in u")
        if us[0] < 0:
            raise ModelError("tabulated grid starts below u = 0")
        if np.any(vals < 0):
            raise ModelError("tabulated values must be nonnegative")
        self._us = us
        self._vals = vals
        # exact integrals of the piecewise-linear curve up to each knot,
        # measured from u = 0 with constant extension below the first knot
        knot_integrals = np.concatenate(
            [[vals[0] * us[0]], 0.5 * (vals[1:] + vals[:-1]) * np.diff(us)]
        )
        self._cum = np.cumsum(knot_integrals)

    def __call__(self, u):
        return np.interp(u, self._us, self._vals)

    def antiderivative(self, v):
        scalar = np.ndim(v) == 0
        v = np.atleast_1d(np.asarray(v, dtype=float))
        idx = np.searchsorted(self._us, v, side="right") - 1
        out = np.empty_like(v)
        below = idx < 0
        out[below] = self._vals[0] * v[below]
        inside = ~below
        i = np.clip(idx[inside], 0, len(self._us) - 1)
        base = self._cum[i]
        du = v[inside] - self._us[i]
        # within the last cell or beyond the grid the slope term vanishes
        at_end = i == len(self._us) - 1
        f_left = self._vals[i]
        f_right = np.where(at_end, self._vals[i], self._vals[np.minimum(i + 1, len(self._us) - 1)])
        width = np.where(at_end, 1.0, self._us[np.minimum(i + 1, len(self._us) - 1)] - self._us[i])
        slope = np.where(at_end, 0.0, (f_right - f_left) / width)
        out[inside] = base + f_left * du + 0.5 * slope * du * du
        return out[0] if scalar else out

    def derivative(self, u):
        raise DomainError("tabulated functions are not differentiable")

    def growth(self):
        return ("poly", 0.0, float(self._vals[-1]))

    def monotonicity(self):
        d = np.diff(self._vals)
        if np.all(d >= 0):
            return "nondecreasing"
        if np.all(d <= 0):
            return "nonincreasing"
        return "unknown"

    def scaled(self, factor):
        return Tabulated(list(zip(self._us, self._vals * factor)))

    def params(self):
        return {"points": [[float(u), float(v)] for u, v in zip(self._us, self._vals)]}

    def __eq__(self, other):
        return (
            isinstance(other, Tabulated)
            and np.array_equal(self._us, other._us)
            and np.array_equal(self._vals, other._vals)
        )

    def __hash__(self):
        return hash((tuple(self._us), tuple(self._vals)))


def evaluate(f, u):
    """Evaluate a state function at wealth u with domain checking.

    Args:
        f: any StateFunction.
        u: nonnegative wealth; SqrtShift with beta > 0 additionally needs u > 0.

    Raises:
        DomainError: u < 0, or a singular evaluation at u = 0.
    """
    u_min = np.min(u) if np.ndim(u) else u
    if u_min < 0:
        raise DomainError(f"wealth must be nonnegative, got {u_min}")
    if isinstance(f, SqrtShift) and f.beta > 0 and u_min == 0:
        raise DomainError("sqrt-shift function is singular at u = 0")
    return f(u)


_FAMILIES = {
    "constant": (Constant, ("c",)),
    "affine": (Affine, ("a", "b")),
    "power_shift": (PowerShift, ("alpha", "beta", "gamma0")),
    "sqrt_shift": (SqrtShift, ("alpha", "beta")),
    "hyperbolic_shift": (HyperbolicShift, ("alpha", "beta", "sign")),
    "exp_scale": (ExpScale, ("mu", "k")),
    "tabulated": (Tabulated, ("points",)),
}


def function_from_spec(obj, where="function"):
    """Build a StateFunction from its spec dictionary, rejecting unknown fields."""

    def bad(message):
        return ParseError(f"{where}: {message}")

    if not isinstance(obj, dict):
        raise bad(f"expected an object, got {type(obj).__name__}")
    if "family" not in obj:
        raise bad("missing 'family' field")
    name = obj["family"]
    if name not in _FAMILIES:
        known = ", ".join(sorted(_FAMILIES))
        raise bad(f"unknown family {name!r}; expected one of: {known}")
    cls, keys = _FAMILIES[name]
    extra = set(obj) - {"family", *keys}
    if extra:
        raise bad(f"unknown fields for family {name!r}: {sorted(extra)}")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise bad(f"family {name!r} missing fields: {missing}")
    if name == "hyperbolic_shift":
        sign = obj["sign"]
        if sign not in (1, -1):
            raise bad("field 'sign' must be 1 or -1")
        return cls(obj["alpha"], obj["beta"], int(sign))
    return cls(**{k: obj[k] for k in keys})
