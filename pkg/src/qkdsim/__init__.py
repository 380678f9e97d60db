"""Simulator, optimizer and Monte Carlo verifier for DPS-QKD fiber links."""

from .dispersion import (
    DispersionSpec,
    PulseShape,
    broadened_pulse,
    calibrate_linewidth,
    effective_params,
    neighbor_leakage,
    window_fraction,
)
from .errors import (
    ConfigError,
    DomainError,
    NoPositiveRate,
    NoSolution,
    ParameterError,
    QkdSimError,
    RequiresSmallP,
    ZeroClickProbability,
)
from .model import (
    LinkParams,
    RatePoint,
    binary_entropy,
    click_probability,
    compression_factor,
    overall_efficiency,
    qber,
    secure_rate,
    sifted_rate,
    total_loss_db,
)
from .montecarlo import (
    ComparisonReport,
    SimConfig,
    SimStats,
    compare_with_analytic,
    simulate,
    simulate_gap_sampled,
)
from .optimize import (
    OptimizeResult,
    SweepRow,
    SweepTable,
    max_distance,
    mu_schedule,
    optimal_mu,
    sweep,
)

__all__ = [
    "ComparisonReport",
    "ConfigError",
    "DispersionSpec",
    "DomainError",
    "LinkParams",
    "NoPositiveRate",
    "NoSolution",
    "OptimizeResult",
    "ParameterError",
    "PulseShape",
    "QkdSimError",
    "RatePoint",
    "RequiresSmallP",
    "SimConfig",
    "SimStats",
    "SweepRow",
    "SweepTable",
    "ZeroClickProbability",
    "binary_entropy",
    "broadened_pulse",
    "calibrate_linewidth",
    "click_probability",
    "compare_with_analytic",
    "compression_factor",
    "effective_params",
    "max_distance",
    "mu_schedule",
    "neighbor_leakage",
    "optimal_mu",
    "overall_efficiency",
    "qber",
    "secure_rate",
    "sifted_rate",
    "simulate",
    "simulate_gap_sampled",
    "sweep",
    "total_loss_db",
    "window_fraction",
]
