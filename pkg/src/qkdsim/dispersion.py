"""Gaussian pulse broadening by chromatic dispersion and its receiver effects.

A pulse is modeled as a Gaussian of the stated FWHM.  Propagation broadens it
in quadrature with the dispersive delay spread coefficient * length *
linewidth; the measurement window then clips a larger share of the energy and
a (tiny) share leaks into the neighboring slots' windows.  The source
linewidth is not a measured input: it is calibrated from an observed
efficiency reduction with :func:`calibrate_linewidth`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import NoSolution, ParameterError
from .model import LinkParams

# FWHM of a Gaussian is 2*sqrt(2*ln 2) standard deviations.
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class PulseShape:
    """Gaussian temporal pulse: FWHM and offset from the slot center."""

    fwhm_s: float
    center_offset_s: float = 0.0

    def __post_init__(self):
        if not self.fwhm_s > 0:
            raise ParameterError(f"fwhm_s must be > 0, got {self.fwhm_s}")

    @property
    def sigma_s(self) -> float:
        return self.fwhm_s / FWHM_PER_SIGMA


@dataclass(frozen=True)
class DispersionSpec:
    """Fiber dispersion coefficient and source spectral width."""

    coefficient_ps_per_km_nm: float
    linewidth_nm: float
    enabled: bool = True

    def __post_init__(self):
        if self.coefficient_ps_per_km_nm < 0:
            raise ParameterError("dispersion coefficient must be >= 0")
        if self.linewidth_nm < 0:
            raise ParameterError("linewidth_nm must be >= 0")


def broadened_pulse(shape: PulseShape, spec: DispersionSpec, length_km: float) -> PulseShape:
    """Pulse after propagating ``length_km``: widths add in quadrature."""
    spread_s = spec.coefficient_ps_per_km_nm * length_km * spec.linewidth_nm * 1e-12
    return replace(shape, fwhm_s=math.hypot(shape.fwhm_s, spread_s))


def window_fraction(shape: PulseShape, window_s: float) -> float:
    """Fraction of pulse energy inside +-window/2 around the slot center."""
    if not window_s > 0:
        raise ParameterError(f"window_s must be > 0, got {window_s}")
    s = shape.sigma_s * math.sqrt(2.0)
    lo = (-window_s / 2.0 - shape.center_offset_s) / s
    hi = (window_s / 2.0 - shape.center_offset_s) / s
    return 0.5 * (math.erf(hi) - math.erf(lo))


def neighbor_leakage(shape: PulseShape, slot_period_s: float, window_s: float) -> float:
    """Fraction of pulse energy captured by an adjacent slot's window.

    Evaluated for the window one period away; by symmetry the preceding
    slot's window captures the same fraction of a centered pulse.
    """
    if not slot_period_s > window_s:
        raise ParameterError("slot_period_s must exceed window_s")
    s = shape.sigma_s * math.sqrt(2.0)
    lo = (slot_period_s - window_s / 2.0 - shape.center_offset_s) / s
    hi = (slot_period_s + window_s / 2.0 - shape.center_offset_s) / s
    return 0.5 * (math.erf(hi) - math.erf(lo))


def effective_params(p: LinkParams, spec: DispersionSpec, shape: PulseShape) -> LinkParams:
    """Fold dispersion into the link parameters.

    The detector efficiency is scaled by the in-window fraction of the
    broadened pulse relative to the launched one, and the baseline error is
    re-mixed with the neighbor-slot crosstalk weight, which carries a random
    bit (error weight 0.5) exactly like a dark count.
    """
    if not spec.enabled or p.fiber_length_km == 0.0:
        return p
    out = broadened_pulse(shape, spec, p.fiber_length_km)
    factor = window_fraction(out, p.time_window_s) / window_fraction(shape, p.time_window_s)
    slot_period_s = 1.0 / p.clock_rate_hz
    q = neighbor_leakage(out, slot_period_s, p.time_window_s)
    e_mixed = (p.baseline_error * factor + 0.5 * q) / (factor + q)
    return replace(
        p,
        detector_efficiency=p.detector_efficiency * factor,
        baseline_error=e_mixed,
    )


def calibrate_linewidth(
    p: LinkParams,
    shape: PulseShape,
    spec: DispersionSpec,
    length_km: float,
    target_factor: float,
    tol: float = 1e-6,
) -> float:
    """Source linewidth (nm) that reproduces an observed efficiency factor.

    Bisects on the linewidth in [0, 1] nm until the relative in-window
    fraction at ``length_km`` equals ``target_factor``; the fraction is
    strictly decreasing in linewidth, so the bracket check is exact.
    ``spec.linewidth_nm`` is ignored (it is the unknown).
    """
    if not 0.0 < target_factor <= 1.0:
        raise NoSolution(f"target_factor must be in (0, 1], got {target_factor}")
    if target_factor == 1.0:
        return 0.0
    base = window_fraction(shape, p.time_window_s)

    def factor(linewidth_nm: float) -> float:
        trial = replace(spec, linewidth_nm=linewidth_nm, enabled=True)
        return window_fraction(broadened_pulse(shape, trial, length_km), p.time_window_s) / base

    lo, hi = 0.0, 1.0
    if factor(hi) - target_factor > tol:
        raise NoSolution(
            f"target_factor {target_factor} not reachable with linewidth <= {hi} nm"
        )
    mid = hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = factor(mid)
        if abs(f_mid - target_factor) <= tol:
            return mid
        if f_mid > target_factor:
            lo = mid
        else:
            hi = mid
    raise NoSolution("bisection failed to reach the target factor tolerance")
