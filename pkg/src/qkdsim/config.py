"""Run configuration: flat ``section.key`` TOML files plus flag overrides.

Unknown keys are hard errors (they are almost always typos silently changing
nothing), and so are missing ones; only the measured-loss override and the
source linewidth are optional.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dispersion import DispersionSpec, PulseShape
from .errors import ConfigError, ParameterError
from .model import LinkParams

REQUIRED_KEYS = (
    "source.clock_hz",
    "source.mu",
    "source.pulse_fwhm_ps",
    "fiber.length_km",
    "fiber.alpha_db_per_km",
    "fiber.dispersion_ps_per_km_nm",
    "receiver.insertion_loss_db",
    "receiver.time_window_ps",
    "receiver.dead_time_ns",
    "receiver.baseline_error",
    "detector.efficiency",
    "detector.dark_hz",
    "security.ec_factor",
)
OPTIONAL_KEYS = (
    "fiber.loss_db_override",
    "fiber.linewidth_nm",
)
KNOWN_KEYS = frozenset(REQUIRED_KEYS) | frozenset(OPTIONAL_KEYS)

DEFAULT_CONFIG_PATH = Path(__file__).with_name("paper.toml")


@dataclass(frozen=True)
class RunConfig:
    params: LinkParams
    dispersion_spec: DispersionSpec  # loaded disabled; commands enable it on demand
    pulse: PulseShape


def _flatten(table: dict, prefix: str = "") -> dict[str, object]:
    flat: dict[str, object] = {}
    for key, value in table.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def _as_number(key: str, value: object) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key {key!r} must be a number, got {value!r}")
    return float(value)


def load_config(path: str | Path, overrides: dict[str, float] | None = None) -> RunConfig:
    """Parse and validate a config file, applying flag overrides on top."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}")
    flat = _flatten(raw)
    unknown = sorted(set(flat) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r} in {path}")
    if overrides:
        bad = sorted(set(overrides) - KNOWN_KEYS)
        if bad:
            raise ConfigError(f"unknown override key {bad[0]!r}")
        flat.update(overrides)
    missing = sorted(set(REQUIRED_KEYS) - set(flat))
    if missing:
        raise ConfigError(f"missing config key {missing[0]!r} in {path}")
    values = {key: _as_number(key, value) for key, value in flat.items()}

    try:
        params = LinkParams(
            clock_rate_hz=values["source.clock_hz"],
            mu=values["source.mu"],
            fiber_length_km=values["fiber.length_km"],
            alpha_db_per_km=values["fiber.alpha_db_per_km"],
            fiber_loss_db_override=values.get("fiber.loss_db_override"),
            insertion_loss_db=values["receiver.insertion_loss_db"],
            detector_efficiency=values["detector.efficiency"],
            dark_rate_hz=values["detector.dark_hz"],
            time_window_s=values["receiver.time_window_ps"] * 1e-12,
            dead_time_s=values["receiver.dead_time_ns"] * 1e-9,
            baseline_error=values["receiver.baseline_error"],
            ec_efficiency=values["security.ec_factor"],
        )
        spec = DispersionSpec(
            coefficient_ps_per_km_nm=values["fiber.dispersion_ps_per_km_nm"],
            linewidth_nm=values.get("fiber.linewidth_nm", 0.0),
            enabled=False,
        )
        pulse = PulseShape(fwhm_s=values["source.pulse_fwhm_ps"] * 1e-12)
    except ParameterError as exc:
        raise ConfigError(str(exc))
    return RunConfig(params=params, dispersion_spec=spec, pulse=pulse)
