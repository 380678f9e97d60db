"""Closed-form rate model for a differential-phase-shift QKD link.

The chain is: fiber + receiver loss -> overall efficiency -> per-slot click
probabilities -> sifted rate with dead-time throughput loss -> QBER -> secure
rate under individual attacks.  All functions are pure; ``LinkParams`` is
immutable, so everything here is safe to call from any number of workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError, ParameterError, ZeroClickProbability

# Privacy amplification breaks down once 1 - e^2 - (1-6e)^2/2 <= 0; the
# positive root of 38e^2 - 12e - 1 = 0.
QBER_DOMAIN_LIMIT = (12.0 + math.sqrt(296.0)) / 76.0

# No security claim is made above this QBER: past e = 1/6 the compression
# factor stops decreasing in e (and diverges toward QBER_DOMAIN_LIMIT), which
# would grant spurious positive rates to noise-dominated links.
SECURE_QBER_LIMIT = 1.0 / 6.0


@dataclass(frozen=True)
class LinkParams:
    """Full parameter set of source, fiber, receiver and detectors.

    ``detector_efficiency`` is the *effective* detection efficiency at zero
    fiber length, i.e. it already includes the clipping of the measurement
    window on the unbroadened pulse.  Dispersion adjustments (see
    :mod:`qkdsim.dispersion`) therefore apply only a relative factor on top.

    ``fiber_loss_db_override``, when set, replaces ``alpha_db_per_km *
    fiber_length_km`` with a measured total fiber loss in dB.
    """

    clock_rate_hz: float
    mu: float
    fiber_length_km: float
    alpha_db_per_km: float
    insertion_loss_db: float
    detector_efficiency: float
    dark_rate_hz: float
    time_window_s: float
    dead_time_s: float
    baseline_error: float
    fiber_loss_db_override: float | None = None
    dark_error: float = 0.5
    ec_efficiency: float = 1.2

    def __post_init__(self):
        if not self.clock_rate_hz > 0:
            raise ParameterError(f"clock_rate_hz must be > 0, got {self.clock_rate_hz}")
        if not 0.0 < self.mu < 0.5:
            raise ParameterError(f"mu must be in (0, 0.5), got {self.mu}")
        if self.fiber_length_km < 0:
            raise ParameterError(f"fiber_length_km must be >= 0, got {self.fiber_length_km}")
        if self.alpha_db_per_km < 0:
            raise ParameterError(f"alpha_db_per_km must be >= 0, got {self.alpha_db_per_km}")
        if self.fiber_loss_db_override is not None and self.fiber_loss_db_override < 0:
            raise ParameterError("fiber_loss_db_override must be >= 0 when set")
        if self.insertion_loss_db < 0:
            raise ParameterError(f"insertion_loss_db must be >= 0, got {self.insertion_loss_db}")
        if not 0.0 <= self.detector_efficiency <= 1.0:
            raise ParameterError(
                f"detector_efficiency must be in [0, 1], got {self.detector_efficiency}"
            )
        if self.dark_rate_hz < 0:
            raise ParameterError(f"dark_rate_hz must be >= 0, got {self.dark_rate_hz}")
        if self.time_window_s <= 0:
            raise ParameterError(f"time_window_s must be > 0, got {self.time_window_s}")
        if self.time_window_s * self.clock_rate_hz > 1.0 + 1e-12:
            raise ParameterError("time_window_s does not fit one clock slot")
        if self.dead_time_s < 0:
            raise ParameterError(f"dead_time_s must be >= 0, got {self.dead_time_s}")
        if not 0.0 <= self.baseline_error < 0.5:
            raise ParameterError(f"baseline_error must be in [0, 0.5), got {self.baseline_error}")
        if self.dark_error != 0.5:
            raise ParameterError("dark_error is fixed at 0.5 (dark clicks are random bits)")
        if self.ec_efficiency < 1.0:
            raise ParameterError(f"ec_efficiency must be >= 1, got {self.ec_efficiency}")

    def at_length(self, length_km: float) -> "LinkParams":
        """Copy with a new fiber length (any measured-loss override cleared)."""
        return replace(self, fiber_length_km=length_km, fiber_loss_db_override=None)

    def with_mu(self, mu: float) -> "LinkParams":
        return replace(self, mu=mu)


@dataclass(frozen=True)
class RatePoint:
    """Analytic model outputs for one link configuration.

    ``secure_fraction`` is the raw privacy fraction tau - f(e)*H2(e) and may
    be negative (or -inf when the QBER exceeds the validity limit of tau);
    ``secure_rate_hz`` clamps it at zero and ``insecure`` flags the clamp, so
    distance sweeps across the secure boundary stay total.
    """

    length_km: float
    total_loss_db: float
    eta: float
    p_signal: float
    p_dark: float
    p_click: float
    qber: float
    sifted_rate_hz: float
    secure_fraction: float
    secure_rate_hz: float
    insecure: bool


def total_loss_db(p: LinkParams) -> float:
    """Total attenuation (dB) between source output and detector input."""
    if p.fiber_loss_db_override is not None:
        return p.fiber_loss_db_override + p.insertion_loss_db
    return p.alpha_db_per_km * p.fiber_length_km + p.insertion_loss_db


def overall_efficiency(p: LinkParams) -> float:
    """Probability that a photon leaving the source produces a detection."""
    return p.detector_efficiency * 10.0 ** (-total_loss_db(p) / 10.0)


def click_probability(p: LinkParams) -> tuple[float, float, float]:
    """Per-slot click probabilities ``(p_signal, p_dark, p_click)``.

    The Poissonian signal term uses ``-expm1(-mu*eta)`` for stability at the
    tiny exponents typical of long links; the dark term counts both detector
    channels of the receiver.
    """
    eta = overall_efficiency(p)
    p_signal = -math.expm1(-p.mu * eta)
    p_dark = 2.0 * p.dark_rate_hz * p.time_window_s
    return p_signal, p_dark, p_signal + p_dark


def sifted_rate(p: LinkParams) -> float:
    """Sifted key rate (bit/s) after the dead-time throughput loss."""
    _, _, p_click = click_probability(p)
    return _sifted_rate_from_click(p.clock_rate_hz, p_click, p.dead_time_s)


def _sifted_rate_from_click(clock_rate_hz: float, p_click: float, dead_time_s: float) -> float:
    # Paralyzable-detector throughput: raw rate times exp(-rate * dead time).
    raw = clock_rate_hz * p_click
    return raw * math.exp(-raw * dead_time_s)


def qber(p: LinkParams) -> float:
    """Quantum bit error rate: baseline errors plus random dark-count bits."""
    p_signal, p_dark, p_click = click_probability(p)
    if p_click == 0.0:
        raise ZeroClickProbability("p_click = 0: no clicks, QBER undefined")
    return (p.baseline_error * p_signal + p.dark_error * p_dark) / p_click


def binary_entropy(x: float) -> float:
    """Binary Shannon entropy H2(x) in bits, with 0*log2(0) == 0."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary_entropy requires x in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def compression_factor(mu: float, e: float) -> float:
    """Privacy amplification compression factor against individual attacks.

    tau = -(1 - 2*mu) * log2(1 - e^2 - (1 - 6e)^2 / 2), valid while the log
    argument stays positive (e below ~0.3843).
    """
    if not 0.0 < mu <= 0.5:
        raise DomainError(f"compression_factor requires mu in (0, 0.5], got {mu}")
    if e < 0.0:
        raise DomainError(f"compression_factor requires e >= 0, got {e}")
    arg = 1.0 - e * e - (1.0 - 6.0 * e) ** 2 / 2.0
    if arg <= 0.0:
        raise DomainError(f"QBER {e} is outside the validity range of the compression factor")
    return -(1.0 - 2.0 * mu) * math.log2(arg)


def secure_rate(p: LinkParams, qber_override: float | None = None) -> RatePoint:
    """Assemble the full analytic rate point for one link configuration.

    ``qber_override`` substitutes a measured QBER for the model one (the
    click probabilities and sifted rate are left untouched); used to score a
    link against an observed error rate.
    """
    p_signal, p_dark, p_click = click_probability(p)
    if p_click == 0.0:
        raise ZeroClickProbability("p_click = 0: no clicks, QBER undefined")
    e = qber_override if qber_override is not None else qber(p)
    r_sifted = _sifted_rate_from_click(p.clock_rate_hz, p_click, p.dead_time_s)
    if e > SECURE_QBER_LIMIT:
        # Outside the compression factor's monotone range: no security claim,
        # but not an error, so long-distance sweeps stay total.
        fraction = -math.inf
    else:
        fraction = compression_factor(p.mu, e) - p.ec_efficiency * binary_entropy(e)
    insecure = fraction <= 0.0
    return RatePoint(
        length_km=p.fiber_length_km,
        total_loss_db=total_loss_db(p),
        eta=overall_efficiency(p),
        p_signal=p_signal,
        p_dark=p_dark,
        p_click=p_click,
        qber=e,
        sifted_rate_hz=r_sifted,
        secure_fraction=fraction,
        secure_rate_hz=r_sifted * max(0.0, fraction),
        insecure=insecure,
    )
