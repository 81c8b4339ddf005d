"""Ruin, dividend, and first-passage analytics for state-dependent dual
risk models, validated against an exact event-driven simulator.

The wealth process decays deterministically at a state-dependent cost
rate and grows by exponentially distributed profit jumps arriving with a
state-dependent intensity.  Analytic modules compute ruin probabilities,
dividend-barrier statistics, wealth moments, and ruin-time transforms;
the simulator reproduces the same quantities from exact sampled paths.
"""

from .dividends import (
    DividendQuery,
    DividendStats,
    dividend_count_pmf,
    dividend_stats,
    expected_single_dividend,
    hitting_probability,
    total_dividends_laplace,
)
from .errors import (
    ConvergenceError,
    DomainError,
    DualRiskError,
    ModelError,
    NoClosedFormError,
    NumericsError,
    ParseError,
)
from .functions import (
    Affine,
    Constant,
    ExpScale,
    HyperbolicShift,
    PowerShift,
    SqrtShift,
    Tabulated,
    function_from_spec,
)
from .model import (
    DualRiskModel,
    integrability_check,
    parse_model_spec,
    serialize_model_spec,
)
from .moments import (
    AffineModelSpec,
    deterministic_hit_time,
    mean_wealth,
    second_moment_wealth,
)
from .ruin import (
    RuinResult,
    ruin_probability,
    ruin_probability_closed,
    solve_theta_star,
)
from .ruin_time import (
    ExpectedRuinQuery,
    LaplaceQuery,
    expected_ruin_time,
    ruin_time_laplace,
    ruin_time_laplace_closed,
)
from .simulate import (
    EstimateWithCI,
    PathEvent,
    SimConfig,
    SimPath,
    auto_ruin_config,
    barrier_hit_indicator,
    discounted_ruin,
    dividend_count,
    dividend_transform,
    estimate,
    estimate_many,
    ruin_indicator,
    ruin_time_statistic,
    simulate_path,
    simulate_paths,
    total_dividends,
    wealth_at_horizon,
    wealth_square_at_horizon,
    write_path_log,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model building
    "Affine",
    "Constant",
    "ExpScale",
    "HyperbolicShift",
    "PowerShift",
    "SqrtShift",
    "Tabulated",
    "DualRiskModel",
    "function_from_spec",
    "parse_model_spec",
    "serialize_model_spec",
    "integrability_check",
    # errors
    "DualRiskError",
    "ModelError",
    "ParseError",
    "DomainError",
    "NoClosedFormError",
    "NumericsError",
    "ConvergenceError",
    # ruin probabilities
    "RuinResult",
    "ruin_probability",
    "ruin_probability_closed",
    "solve_theta_star",
    # dividends
    "DividendQuery",
    "DividendStats",
    "dividend_stats",
    "hitting_probability",
    "expected_single_dividend",
    "dividend_count_pmf",
    "total_dividends_laplace",
    # moments
    "AffineModelSpec",
    "deterministic_hit_time",
    "mean_wealth",
    "second_moment_wealth",
    # ruin time
    "LaplaceQuery",
    "ExpectedRuinQuery",
    "ruin_time_laplace",
    "ruin_time_laplace_closed",
    "expected_ruin_time",
    # simulation
    "SimConfig",
    "SimPath",
    "PathEvent",
    "EstimateWithCI",
    "simulate_path",
    "simulate_paths",
    "write_path_log",
    "estimate",
    "estimate_many",
    "auto_ruin_config",
    "ruin_indicator",
    "discounted_ruin",
    "ruin_time_statistic",
    "dividend_count",
    "total_dividends",
    "dividend_transform",
    "barrier_hit_indicator",
    "wealth_at_horizon",
    "wealth_square_at_horizon",
]
