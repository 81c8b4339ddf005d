"""Exact event-driven Monte Carlo for the state-dependent wealth process.

Between profit jumps the wealth decays along ``u' = -eta(u)``; jumps
arrive with state-dependent intensity ``lam(u)`` and carry Exp(gamma)
sizes.  Jump times come from compensator inversion: the cumulative
hazard accumulated along the decaying flow is driven to an independent
unit-exponential target, which samples the exact conditional law with
no intensity bound required.

Two routes produce the same paths.  :func:`simulate_path` is the
reference: it integrates wealth and hazard jointly with the adaptive
ODE solver and locates events by root finding.  The vectorized engine
behind :func:`estimate` advances whole cohorts using closed-form decay
and hazard kernels (with a guarded Newton inversion when the hazard has
no elementary inverse) and falls back to the reference route for
families the kernels do not cover.  Both walk identical per-path
random streams keyed by ``(master_seed, path_index)``, consuming one
fixed pair of draws per step, so results never depend on chunking,
scheduling, or worker count.

Estimates carry a finite-horizon bias audit: paths still alive at the
horizon (or parked at the absorption level) leave probability mass
unaccounted for, and the estimator bounds that mass through the
analytic ruin probability evaluated at the least favourable surviving
wealth.  Estimates whose bound is not an order of magnitude below the
standard error are flagged.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericsError
from .functions import (
    Affine,
    Constant,
    ExpScale,
    HyperbolicShift,
    PowerShift,
    SqrtShift,
)
from .model import DualRiskModel
from .quad import solve_ivp
from .rng import PathStreams, exponential_from_uniform

_CHUNK = 1 << 16

_RUINED = 1
_HORIZON = 2
_ABSORBED = 3
_STOPPED = 4
_UNRESOLVED = 5

_JUMP = 0
_BARRIER = 1
_RUIN_EVENT = 2

_KIND_NAMES = {_JUMP: "jump", _BARRIER: "barrier_hit", _RUIN_EVENT: "ruin"}


def _require(condition, message):
    if not condition:
        raise DomainError(message)


@dataclass(frozen=True)
class SimConfig:
    """One simulation campaign: model, start state, stopping data, seed.

    Attributes:
        model: Wealth dynamics to simulate.
        u0: Starting wealth.
        horizon: Simulation cutoff time (> 0).
        n_paths: Number of independent paths.
        master_seed: 64-bit seed; path ``i`` owns the stream keyed by
            ``(master_seed, i)``.
        ruin_level: Wealth at or below which a path is ruined.
        barrier: Optional dividend barrier; jumps ending at or above it
            pay out the overshoot.
        safe_level: Optional absorption level for ruin-style runs: a
            path whose wealth reaches it is parked as a survivor, and
            the unresolved mass enters the bias audit.
        single_dividend: Stop a path at its first barrier hit instead
            of resuming at the barrier.
    """

    model: DualRiskModel
    u0: float
    horizon: float
    n_paths: int
    master_seed: int
    ruin_level: float = 0.0
    barrier: float | None = None
    safe_level: float | None = None
    single_dividend: bool = False

    def __post_init__(self):
        _require(math.isfinite(self.u0), "u0: must be finite")
        _require(
            math.isfinite(self.horizon) and self.horizon > 0,
            "horizon: must be finite and positive",
        )
        _require(self.n_paths >= 1, "n_paths: must be at least 1")
        _require(
            0 <= int(self.master_seed) < 2**64,
            "master_seed: must fit in an unsigned 64-bit word",
        )
        _require(
            math.isfinite(self.ruin_level) and self.ruin_level >= 0,
            "ruin_level: must be finite and nonnegative",
        )
        _require(self.u0 >= self.ruin_level, "u0: must not start below the ruin level")
        if self.barrier is not None:
            _require(self.barrier > self.u0, "barrier: must exceed u0")
        if self.safe_level is not None:
            _require(self.barrier is None, "safe_level: incompatible with a barrier")
            _require(self.safe_level > self.u0, "safe_level: must exceed u0")
        if self.single_dividend:
            _require(self.barrier is not None, "single_dividend: needs a barrier")


@dataclass(frozen=True)
class PathEvent:
    """One path event: a jump, a barrier hit, or ruin."""

    time: float
    kind: str
    amount: float
    wealth_after: float


@dataclass(frozen=True)
class SimPath:
    """Event log of one path plus its terminal state."""

    events: tuple
    terminal_kind: str
    terminal_time: float
    terminal_wealth: float

    @property
    def ruined(self):
        return self.terminal_kind == "ruined"

    @property
    def ruin_time(self):
        return self.terminal_time if self.ruined else None


@dataclass(frozen=True)
class EstimateWithCI:
    """Monte Carlo estimate with its normal-theory confidence interval.

    ``bias_bound`` is an upper bound on the unresolved-path bias;
    ``bias_flagged`` marks estimates where that bound is not at least
    an order of magnitude below the standard error.
    """

    point: float
    std_error: float
    ci95: tuple
    n_paths: int
    seed: int
    bias_bound: float = 0.0
    bias_flagged: bool = False


@dataclass(frozen=True)
class Functional:
    """Named per-path statistic understood by the vectorized engine."""

    kind: str
    param: float | None = None


def ruin_indicator():
    """1 if the path is ruined before the horizon, else 0."""
    return Functional("ruin")


def discounted_ruin(delta):
    """exp(-delta*tau) on ruined paths, 0 on survivors."""
    _require(delta > 0, "delta: must be positive")
    return Functional("discounted_ruin", float(delta))


def ruin_time_statistic():
    """tau on ruined paths, 0 on survivors."""
    return Functional("ruin_time")


def dividend_count():
    """Number of barrier hits before the path ends."""
    return Functional("dividend_count")


def total_dividends():
    """Sum of barrier overshoots paid before the path ends."""
    return Functional("total_dividends")


def dividend_transform(theta):
    """exp(-theta * total dividends) at the end of the path."""
    _require(theta > 0, "theta: must be positive")
    return Functional("dividend_transform", float(theta))


def barrier_hit_indicator():
    """1 if the path paid at least one dividend, else 0."""
    return Functional("barrier_hit")


def wealth_at_horizon():
    """Wealth at the horizon, with ruined paths held at the ruin level."""
    return Functional("wealth")


def wealth_square_at_horizon():
    """Square of the horizon wealth, ruined paths held at the ruin level."""
    return Functional("wealth_square")


@dataclass
class _Primitives:
    """Per-path end-state summary shared by every functional."""

    end_kind: np.ndarray
    t_end: np.ndarray
    w_end: np.ndarray
    div_count: np.ndarray
    div_total: np.ndarray


class _Kernels:
    """Closed-form decay and hazard arithmetic for one model."""

    def __init__(self, decay_time, decay_to, cumulative, ratio, invert, hazard_floor):
        self.decay_time = decay_time
        self.decay_to = decay_to
        self.cumulative = cumulative
        self.ratio = ratio
        self.invert = invert
        self.hazard_floor = hazard_floor


def _decay_pair(eta):
    """(decay_time, decay_to) closures for the supported cost families."""
    if isinstance(eta, Constant):
        c = eta.c

        def time(u, w):
            return (u - w) / c

        def to(u, dt):
            return u - c * dt

        return time, to
    if isinstance(eta, Affine):
        a, b = eta.a, eta.b
        if b == 0.0:
            return _decay_pair(Constant(a))
        if b < 0.0:
            return None

        def time(u, w):
            return np.log1p(b * (u - w) / (a + b * w)) / b

        def to(u, dt):
            return ((a + b * u) * np.exp(-b * dt) - a) / b

        return time, to
    if isinstance(eta, ExpScale):
        mu, k = eta.mu, eta.k
        if k == 0.0:
            return _decay_pair(Constant(mu))

        def time(u, w):
            return (np.exp(-k * w) - np.exp(-k * u)) / (mu * k)

        def to(u, dt):
            return -np.log(np.exp(-k * u) + mu * k * dt) / k

        return time, to
    return None


def _hazard_inverse(model, cumulative, ratio, ruin_level):
    """Solve cumulative(u) - cumulative(x) = target for x in [ruin_level, u]."""
    lam, eta = model.lam, model.eta
    if isinstance(lam, Constant) and lam.c == 0.0:
        # No hazard ever accrues, so the landing point is never consumed.
        return lambda u, target: np.asarray(u, dtype=float)
    if isinstance(lam, Constant) and isinstance(eta, Constant):
        r = lam.c / eta.c

        def invert(u, target):
            return u - target / r

        return invert
    if isinstance(lam, Affine) and isinstance(eta, Constant):
        a, b = lam.a / eta.c, lam.b / eta.c
        if b > 0.0:
            # antiderivative a*x + b*x^2/2 inverts as a quadratic
            def invert(u, target):
                f = a * u + 0.5 * b * u * u - target
                return (np.sqrt(a * a + 2.0 * b * np.maximum(f, 0.0)) - a) / b

            return invert
    if isinstance(lam, Constant) and isinstance(eta, Affine) and eta.b > 0.0:
        rate, a, b = lam.c, eta.a, eta.b

        def invert(u, target):
            return ((a + b * u) * np.exp(-target * b / rate) - a) / b

        return invert

    floor = ruin_level

    def invert(u, target):
        goal = cumulative(u) - target
        lo = np.full_like(u, floor)
        hi = u.astype(float, copy=True)
        x = 0.5 * (lo + hi)
        for _ in range(90):
            f = cumulative(x) - goal
            above = f > 0.0
            hi = np.where(above, x, hi)
            lo = np.where(above, lo, x)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = f / ratio(x)
            trial = x - step
            bad = ~np.isfinite(trial) | (trial <= lo) | (trial >= hi)
            trial = np.where(bad, 0.5 * (lo + hi), trial)
            if np.all(np.abs(trial - x) <= 1e-13 * (1.0 + np.abs(trial))):
                x = trial
                break
            x = trial
        return np.clip(x, floor, u)

    return invert


def _antiderivative(fn):
    """Closed antiderivative of one state function, or None."""
    if isinstance(fn, Constant):
        c = fn.c
        return lambda x: c * x
    if isinstance(fn, Affine):
        a, b = fn.a, fn.b
        return lambda x: (a + 0.5 * b * x) * x
    if isinstance(fn, PowerShift):
        alpha, beta, gamma0 = fn.alpha, fn.beta, fn.gamma0
        power = beta + 1.0
        return lambda x: gamma0 * x + alpha * x**power / power
    if isinstance(fn, ExpScale):
        mu, k = fn.mu, fn.k
        if k == 0.0:
            return lambda x: mu * x
        return lambda x: mu * np.expm1(k * x) / k
    if isinstance(fn, SqrtShift):
        alpha, beta = fn.alpha, fn.beta
        return lambda x: alpha * x + 2.0 * beta * np.sqrt(x)
    if isinstance(fn, HyperbolicShift):
        alpha, beta, sign = fn.alpha, fn.beta, fn.sign
        return lambda x: alpha * x + sign * beta * np.log1p(x)
    return None


def _cumulative_closed(lam, eta):
    """Closed antiderivative of lam/eta, or None for uncovered pairs.

    Only differences of the result enter the engine, so an additive
    constant is free; the value may be -inf where the integral diverges
    at the origin, which correctly makes the ruin budget infinite.
    """
    if isinstance(lam, Constant) and lam.c == 0.0:
        return lambda x: np.zeros_like(np.asarray(x, dtype=float))
    if isinstance(eta, Constant):
        inner = _antiderivative(lam)
        if inner is None:
            return None
        c = eta.c
        return lambda x: inner(x) / c
    if isinstance(eta, Affine) and eta.b > 0.0:
        a, b = eta.a, eta.b
        if isinstance(lam, Constant):
            r = lam.c
            return lambda x: (r / b) * np.log(a + b * x)
        if isinstance(lam, Affine):
            slope = lam.b / b
            weight = (lam.a * b - lam.b * a) / (b * b)
            return lambda x: slope * x + weight * np.log(a + b * x)
    if isinstance(eta, ExpScale) and eta.k != 0.0:
        mu, k = eta.mu, eta.k
        if isinstance(lam, Constant):
            r = lam.c
            return lambda x: -r * np.exp(-k * x) / (mu * k)
        if isinstance(lam, ExpScale):
            nu, j = lam.mu, lam.k
            if j == k:
                return lambda x: (nu / mu) * x
            return lambda x: (nu / mu) * np.expm1((j - k) * x) / (j - k)
    return None


def _build_kernels(cfg):
    """Vectorized kernels for the fast engine, or None when unsupported."""
    pair = _decay_pair(cfg.model.eta)
    if pair is None:
        return None
    cumulative = _cumulative_closed(cfg.model.lam, cfg.model.eta)
    if cumulative is None:
        return None
    decay_time, decay_to = pair
    lam, eta = cfg.model.lam, cfg.model.eta

    def ratio(x):
        return np.asarray(lam(x), dtype=float) / np.asarray(eta(x), dtype=float)

    invert = _hazard_inverse(cfg.model, cumulative, ratio, cfg.ruin_level)
    with np.errstate(divide="ignore"):
        floor = float(cumulative(cfg.ruin_level))
    return _Kernels(decay_time, decay_to, cumulative, ratio, invert, floor)


def _sweep_chunk(cfg, kernels, start, stop, max_steps, log):
    """Advance one chunk of paths to completion; return its primitives."""
    n = stop - start
    gamma = cfg.model.gamma
    streams = PathStreams(cfg.master_seed, np.arange(start, stop, dtype=np.uint64))
    local = np.arange(n)
    u = np.full(n, float(cfg.u0))
    t = np.zeros(n)
    count = np.zeros(n, dtype=np.int64)
    total = np.zeros(n)
    prim = _Primitives(
        end_kind=np.zeros(n, dtype=np.uint8),
        t_end=np.zeros(n),
        w_end=np.zeros(n),
        div_count=np.zeros(n, dtype=np.int64),
        div_total=np.zeros(n),
    )

    def retire(rows, kind, times, wealth):
        idx = local[rows]
        prim.end_kind[idx] = kind
        prim.t_end[idx] = times
        prim.w_end[idx] = wealth
        prim.div_count[idx] = count[rows]
        prim.div_total[idx] = total[rows]

    def record(rows, times, kind, amount, wealth):
        if log is not None and rows.size:
            log.append((
                rows + start,
                np.asarray(times, dtype=float).copy(),
                np.full(rows.size, kind, dtype=np.uint8),
                np.asarray(amount, dtype=float).copy(),
                np.asarray(wealth, dtype=float).copy(),
            ))

    if cfg.u0 <= cfg.ruin_level:
        all_rows = np.ones(n, dtype=bool)
        retire(all_rows, _RUINED, 0.0, cfg.ruin_level)
        record(local, np.zeros(n), _RUIN_EVENT, np.zeros(n), np.full(n, cfg.ruin_level))
        return prim

    steps = 0
    while local.size:
        steps += 1
        if steps > max_steps:
            live = np.ones(local.size, dtype=bool)
            retire(live, _UNRESOLVED, t, u)
            break
        u_draw, c_draw = streams.uniform_pair()
        target = exponential_from_uniform(u_draw)
        budget = kernels.cumulative(u) - kernels.hazard_floor
        jump = target < budget

        landing = np.where(jump, kernels.invert(u, np.minimum(target, budget)),
                           cfg.ruin_level)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            dt = kernels.decay_time(u, landing)
        t_next = t + dt
        past = ~(t_next <= cfg.horizon)

        if past.any():
            at_horizon = kernels.decay_to(u[past], cfg.horizon - t[past])
            retire(past, _HORIZON, cfg.horizon, at_horizon)

        ruin_rows = ~jump & ~past
        if ruin_rows.any():
            retire(ruin_rows, _RUINED, t_next[ruin_rows], cfg.ruin_level)
            record(local[ruin_rows], t_next[ruin_rows], _RUIN_EVENT,
                   np.zeros(int(ruin_rows.sum())), np.full(int(ruin_rows.sum()),
                   cfg.ruin_level))

        live = jump & ~past
        size = exponential_from_uniform(c_draw) / gamma
        wealth = landing + size
        drop = past | ruin_rows

        if cfg.barrier is not None and live.any():
            hit = live & (wealth >= cfg.barrier)
            if hit.any():
                overshoot = wealth[hit] - cfg.barrier
                count[hit] += 1
                total[hit] += overshoot
                record(local[hit], t_next[hit], _BARRIER, overshoot,
                       np.full(overshoot.size, float(cfg.barrier)))
                wealth[hit] = cfg.barrier
                if cfg.single_dividend:
                    retire(hit, _STOPPED, t_next[hit], cfg.barrier)
                    drop = drop | hit
                    live = live & ~hit
            plain = live & ~hit
        else:
            plain = live
        if plain.any():
            record(local[plain], t_next[plain], _JUMP, size[plain], wealth[plain])

        if cfg.safe_level is not None and live.any():
            parked = live & (wealth >= cfg.safe_level)
            if parked.any():
                retire(parked, _ABSORBED, t_next[parked], wealth[parked])
                drop = drop | parked

        keep = ~drop
        if not keep.all():
            local = local[keep]
            u = wealth[keep]
            t = t_next[keep]
            count = count[keep]
            total = total[keep]
            streams.keep(keep)
        else:
            u = wealth
            t = t_next
    return prim


def _merge_primitives(parts, n):
    prim = _Primitives(
        end_kind=np.empty(n, dtype=np.uint8),
        t_end=np.empty(n),
        w_end=np.empty(n),
        div_count=np.empty(n, dtype=np.int64),
        div_total=np.empty(n),
    )
    at = 0
    for part in parts:
        m = part.end_kind.size
        prim.end_kind[at:at + m] = part.end_kind
        prim.t_end[at:at + m] = part.t_end
        prim.w_end[at:at + m] = part.w_end
        prim.div_count[at:at + m] = part.div_count
        prim.div_total[at:at + m] = part.div_total
        at += m
    return prim


def _resolve_workers(workers):
    if workers is not None:
        _require(int(workers) >= 1, "workers: must be at least 1")
        return int(workers)
    env = os.environ.get("DUALRISK_WORKERS")
    if env:
        try:
            parsed = int(env)
        except ValueError:
            raise DomainError("DUALRISK_WORKERS: must be an integer") from None
        _require(parsed >= 1, "DUALRISK_WORKERS: must be at least 1")
        return parsed
    return os.cpu_count() or 1


def _run_engine(cfg, workers, max_steps, log_events=False):
    kernels = _build_kernels(cfg)
    if kernels is None:
        return None
    spans = [(lo, min(lo + _CHUNK, cfg.n_paths))
             for lo in range(0, cfg.n_paths, _CHUNK)]
    logs = [[] if log_events else None for _ in spans]

    def work(item):
        (lo, hi), log = item
        return _sweep_chunk(cfg, kernels, lo, hi, max_steps, log)

    n_workers = min(_resolve_workers(workers), len(spans))
    if n_workers <= 1:
        parts = [work(item) for item in zip(spans, logs)]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(work, zip(spans, logs)))
    merged_log = None
    if log_events:
        merged_log = [rec for chunk in logs for rec in chunk]
    return _merge_primitives(parts, cfg.n_paths), merged_log


def simulate_path(cfg, path_index):
    """Simulate one path with the adaptive ODE reference route.

    Wealth and accumulated hazard are integrated jointly; the next jump
    fires when the hazard reaches an independent Exp(1) target unless
    the wealth reaches the ruin level or the horizon first.

    Args:
        cfg: Simulation configuration.
        path_index: Path number in ``[0, cfg.n_paths)``.

    Returns:
        The path's event log and terminal state.

    Raises:
        DomainError: If ``path_index`` is out of range.
        NumericsError: If the ODE solver fails, with the path index.
    """
    _require(0 <= path_index < cfg.n_paths, "path_index: out of range")
    model = cfg.model
    key = np.array([cfg.master_seed, path_index], dtype=np.uint64)
    draws = np.random.Generator(np.random.Philox(key=key))
    events = []
    t, u = 0.0, float(cfg.u0)
    if u <= cfg.ruin_level:
        events.append(PathEvent(0.0, "ruin", 0.0, cfg.ruin_level))
        return SimPath(tuple(events), "ruined", 0.0, cfg.ruin_level)

    floor = float(cfg.ruin_level)

    def field(_, y):
        # Trial steps may probe below the ruin level where fractional
        # powers are undefined; the terminal ruin event makes that region
        # unobservable, so coefficients are frozen at the floor.
        w = y[0] if y[0] > floor else floor
        return (-float(model.eta(w)), float(model.lam(w)))

    while True:
        target = -math.log1p(-draws.random())
        size_uniform = draws.random()

        def hazard_hit(_, y, goal=target):
            return y[1] - goal

        def ruin_hit(_, y):
            return y[0] - cfg.ruin_level

        hazard_hit.terminal = True
        hazard_hit.direction = 1
        ruin_hit.terminal = True
        ruin_hit.direction = -1
        try:
            sol = solve_ivp(field, t, (u, 0.0), cfg.horizon,
                            rtol=1e-10, atol=1e-12,
                            events=(hazard_hit, ruin_hit))
        except NumericsError as exc:
            raise NumericsError(f"path {path_index}: {exc}") from exc
        jump_times = sol.event_times[0]
        ruin_times = sol.event_times[1]
        ruined = ruin_times.size and (not jump_times.size
                                      or ruin_times[0] <= jump_times[0])
        if ruined:
            tau = float(ruin_times[0])
            events.append(PathEvent(tau, "ruin", 0.0, cfg.ruin_level))
            return SimPath(tuple(events), "ruined", tau, cfg.ruin_level)
        if not jump_times.size:
            return SimPath(tuple(events), "survived", cfg.horizon,
                           float(sol.y_end[0]))
        t = float(jump_times[0])
        landed = float(sol.event_states[0][0][0])
        size = -math.log1p(-size_uniform) / model.gamma
        u = landed + size
        if cfg.barrier is not None and u >= cfg.barrier:
            overshoot = u - cfg.barrier
            events.append(PathEvent(t, "barrier_hit", overshoot, float(cfg.barrier)))
            if cfg.single_dividend:
                return SimPath(tuple(events), "survived", t, float(cfg.barrier))
            u = float(cfg.barrier)
        else:
            events.append(PathEvent(t, "jump", size, u))
        if cfg.safe_level is not None and u >= cfg.safe_level:
            return SimPath(tuple(events), "survived", t, u)


def simulate_paths(cfg, n_paths=None, workers=None, max_steps=5_000_000):
    """Event logs for the first ``n_paths`` paths via the fast engine.

    Falls back to the reference route when the model's families are
    outside the closed decay kernels.
    """
    n = cfg.n_paths if n_paths is None else int(n_paths)
    _require(1 <= n <= cfg.n_paths, "n_paths: out of range")
    sub = SimConfig(model=cfg.model, u0=cfg.u0, horizon=cfg.horizon,
                    n_paths=n, master_seed=cfg.master_seed,
                    ruin_level=cfg.ruin_level, barrier=cfg.barrier,
                    safe_level=cfg.safe_level,
                    single_dividend=cfg.single_dividend)
    run = _run_engine(sub, workers, max_steps, log_events=True)
    if run is None:
        return [simulate_path(sub, i) for i in range(n)]
    prim, log = run
    per_path = [[] for _ in range(n)]
    for slots, times, kinds, amounts, wealth in log:
        for j in range(slots.size):
            per_path[int(slots[j])].append(
                PathEvent(float(times[j]), _KIND_NAMES[int(kinds[j])],
                          float(amounts[j]), float(wealth[j])))
    paths = []
    for i in range(n):
        events = tuple(sorted(per_path[i], key=lambda e: e.time))
        kind = "ruined" if prim.end_kind[i] == _RUINED else "survived"
        paths.append(SimPath(events, kind, float(prim.t_end[i]),
                             float(prim.w_end[i])))
    return paths


def write_path_log(cfg, stream, n_paths=None, workers=None):
    """Write one CSV record per event for the first ``n_paths`` paths.

    Columns: path_index, time, kind, size_or_overshoot, wealth_after.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["path_index", "time", "kind", "size_or_overshoot",
                     "wealth_after"])
    for index, path in enumerate(simulate_paths(cfg, n_paths, workers)):
        for event in path.events:
            writer.writerow([index, repr(event.time), event.kind,
                             repr(event.amount), repr(event.wealth_after)])


def _primitives_from_paths(cfg, paths):
    n = len(paths)
    prim = _Primitives(
        end_kind=np.zeros(n, dtype=np.uint8),
        t_end=np.zeros(n),
        w_end=np.zeros(n),
        div_count=np.zeros(n, dtype=np.int64),
        div_total=np.zeros(n),
    )
    for i, path in enumerate(paths):
        hits = [e for e in path.events if e.kind == "barrier_hit"]
        prim.div_count[i] = len(hits)
        prim.div_total[i] = float(sum(e.amount for e in hits))
        prim.t_end[i] = path.terminal_time
        prim.w_end[i] = path.terminal_wealth
        if path.ruined:
            prim.end_kind[i] = _RUINED
        elif cfg.safe_level is not None and path.terminal_wealth >= cfg.safe_level:
            prim.end_kind[i] = _ABSORBED
        elif cfg.single_dividend and hits:
            prim.end_kind[i] = _STOPPED
        else:
            prim.end_kind[i] = _HORIZON
    return prim


_DIVIDEND_KINDS = ("dividend_count", "total_dividends", "dividend_transform",
                   "barrier_hit")
_BOUNDED_KINDS = ("ruin", "discounted_ruin", "barrier_hit", "dividend_transform")
_WEALTH_KINDS = ("wealth", "wealth_square")


def _functional_values(func, prim, cfg):
    ruined = prim.end_kind == _RUINED
    if func.kind == "ruin":
        return ruined.astype(float)
    if func.kind == "discounted_ruin":
        return np.where(ruined, np.exp(-func.param * prim.t_end), 0.0)
    if func.kind == "ruin_time":
        return np.where(ruined, prim.t_end, 0.0)
    if func.kind == "dividend_count":
        return prim.div_count.astype(float)
    if func.kind == "total_dividends":
        return prim.div_total.copy()
    if func.kind == "dividend_transform":
        return np.exp(-func.param * prim.div_total)
    if func.kind == "barrier_hit":
        return (prim.div_count > 0).astype(float)
    if func.kind == "wealth":
        return np.where(ruined, cfg.ruin_level, prim.w_end)
    if func.kind == "wealth_square":
        w = np.where(ruined, cfg.ruin_level, prim.w_end)
        return w * w
    raise DomainError(f"functional: unknown kind {func.kind!r}")


def _unresolved_mass(cfg, prim):
    """Bound on the probability mass of paths without a decided fate."""
    open_kind = (prim.end_kind == _HORIZON) | (prim.end_kind == _UNRESOLVED)
    parked = prim.end_kind == _ABSORBED
    n = prim.end_kind.size
    if cfg.barrier is not None:
        return float(open_kind.sum()) / n

    def tail_weight(mask):
        if not mask.any():
            return 0.0
        least = float(prim.w_end[mask].min())
        try:
            from .ruin import ruin_probability

            psi = float(ruin_probability(cfg.model, max(least, 0.0)).psi)
            psi = min(max(psi, 0.0), 1.0)
        except Exception:
            psi = 1.0
        return psi * float(mask.sum()) / n

    return tail_weight(open_kind) + tail_weight(parked)


def _validate_functional(cfg, func):
    if func.kind in _DIVIDEND_KINDS:
        _require(cfg.barrier is not None,
                 f"functional {func.kind!r}: needs a barrier in the config")
    if func.kind in _WEALTH_KINDS:
        _require(cfg.safe_level is None,
                 f"functional {func.kind!r}: incompatible with an absorption level")


def estimate_many(cfg, functionals, workers=None, max_steps=5_000_000):
    """Estimate several per-path statistics from one shared path sweep.

    Args:
        cfg: Simulation configuration.
        functionals: Functional descriptors, or callables mapping a
            :class:`SimPath` to a number (callables force the slower
            reference route).
        workers: Thread count; defaults to ``DUALRISK_WORKERS`` or the
            logical core count.  The result is bit-identical for every
            choice.
        max_steps: Safety valve on events per path; paths still alive
            afterwards are counted as unresolved in the bias audit.

    Returns:
        One :class:`EstimateWithCI` per functional, in order.
    """
    funcs = list(functionals)
    _require(len(funcs) >= 1, "functionals: need at least one")
    descriptors = all(isinstance(f, Functional) for f in funcs)
    for f in funcs:
        if isinstance(f, Functional):
            _validate_functional(cfg, f)
        elif not callable(f):
            raise DomainError("functionals: entries must be descriptors or callables")

    run = _run_engine(cfg, workers, max_steps) if descriptors else None
    paths = None
    if run is None:
        paths = [simulate_path(cfg, i) for i in range(cfg.n_paths)]
        prim = _primitives_from_paths(cfg, paths)
    else:
        prim = run[0]

    mass = _unresolved_mass(cfg, prim)
    unresolved_count = int(((prim.end_kind == _HORIZON)
                            | (prim.end_kind == _UNRESOLVED)
                            | (prim.end_kind == _ABSORBED)).sum())
    out = []
    for func in funcs:
        if isinstance(func, Functional):
            values = _functional_values(func, prim, cfg)
            if func.kind in _WEALTH_KINDS:
                bound = 0.0
            elif func.kind in _BOUNDED_KINDS:
                bound = mass
            else:
                bound = 0.0 if unresolved_count == 0 else math.inf
        else:
            values = np.array([float(func(p)) for p in paths])
            bound = 0.0 if unresolved_count == 0 else math.inf
        n = values.size
        mean = float(values.sum(dtype=np.float64)) / n
        if n > 1:
            centered = values - mean
            var = float((centered * centered).sum(dtype=np.float64)) / (n - 1)
        else:
            var = 0.0
        se = math.sqrt(max(var, 0.0) / n)
        flagged = bound > 0.1 * se if se > 0 else bound > 0.0
        out.append(EstimateWithCI(
            point=mean,
            std_error=se,
            ci95=(mean - 1.96 * se, mean + 1.96 * se),
            n_paths=n,
            seed=cfg.master_seed,
            bias_bound=bound,
            bias_flagged=bool(flagged),
        ))
    return out


def estimate(cfg, functional, workers=None, max_steps=5_000_000):
    """Estimate one per-path statistic; see :func:`estimate_many`."""
    return estimate_many(cfg, [functional], workers=workers,
                         max_steps=max_steps)[0]


def auto_ruin_config(model, u0, n_paths, master_seed, ruin_level=0.0):
    """Size horizon and absorption level for a ruin-probability run.

    The absorption level is pushed out until the analytic ruin
    probability there sits well under the Monte Carlo noise floor, and
    the horizon is scaled from the slowest climb rate toward that
    level, so the resulting estimate passes its own bias audit with an
    order of magnitude to spare.
    """
    from .ruin import ruin_probability

    psi0 = float(ruin_probability(model, max(u0, ruin_level)).psi)
    psi0 = min(max(psi0, 1e-12), 1.0 - 1e-12)
    target = 0.02 * math.sqrt(psi0 * (1.0 - psi0) / n_paths)
    level = max(u0, ruin_level) + 1.0
    for _ in range(200):
        if float(ruin_probability(model, level).psi) <= target:
            break
        level = 1.25 * level + 0.5
    else:
        raise NumericsError(
            "no absorption level found with ruin probability below "
            f"{target!r}; the model's ruin probability decays too slowly")
    grid = np.linspace(ruin_level, level, 65)
    drift = np.asarray(model.lam(grid), dtype=float) / model.gamma \
        - np.asarray(model.eta(grid), dtype=float)
    slowest = float(drift.min())
    if slowest > 0:
        horizon = max(200.0, 25.0 * (level - ruin_level) / slowest)
    else:
        horizon = max(500.0, 50.0 * (level - ruin_level))
    return SimConfig(model=model, u0=u0, horizon=horizon, n_paths=n_paths,
                     master_seed=master_seed, ruin_level=ruin_level,
                     safe_level=level)
