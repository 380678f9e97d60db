"""Mean-photon-number optimization and maximum secure distance.

The secure rate is unimodal in mu on (0, 0.5) for all physical parameter
sets encountered here, so a coarse grid scan brackets the maximum and
golden-section search refines it.  The maximum distance is the largest fiber
length at which some mu still yields a positive secure rate, found by
bisection with a fresh mu optimization at every probe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .dispersion import DispersionSpec, PulseShape, effective_params
from .errors import NoPositiveRate, NoSolution
from .model import LinkParams, RatePoint, secure_rate

MU_LO = 0.001
MU_HI = 0.499
GRID_POINTS = 100
MAX_DISTANCE_BRACKET_KM = 1000.0
INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizeResult:
    mu_star: float
    rate_point: RatePoint
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SweepRow:
    length_km: float
    mu: float
    point: RatePoint


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]

    def __len__(self) -> int:
        return len(self.rows)


def mu_schedule(length_km: float) -> float:
    """Fixed mu policy: 0.19 at the 10 km and 50 km points, 0.20 elsewhere."""
    if abs(length_km - 10.0) < 1e-9 or abs(length_km - 50.0) < 1e-9:
        return 0.19
    return 0.20


def _objective(p: LinkParams, mu: float) -> float:
    return secure_rate(p.with_mu(mu)).secure_rate_hz


def optimal_mu(p: LinkParams, tol: float = 1e-5) -> OptimizeResult:
    """Maximize the secure rate over mu in (0.001, 0.499).

    A 100-point grid scan brackets the maximum (and guards against the flat
    insecure region), then golden-section search narrows the bracket to
    ``tol``.  Raises :class:`NoPositiveRate` when no grid point is secure.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    grid = [MU_LO + i * (MU_HI - MU_LO) / (GRID_POINTS - 1) for i in range(GRID_POINTS)]
    values = [_objective(p, mu) for mu in grid]
    best = max(range(GRID_POINTS), key=lambda i: values[i])
    if values[best] <= 0.0:
        raise NoPositiveRate(
            f"no positive secure rate at {p.fiber_length_km} km for any mu"
        )
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, GRID_POINTS - 1)]

    c = b - INV_GOLDEN * (b - a)
    d = a + INV_GOLDEN * (b - a)
    fc = _objective(p, c)
    fd = _objective(p, d)
    iterations = GRID_POINTS + 2
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_GOLDEN * (b - a)
            fc = _objective(p, c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_GOLDEN * (b - a)
            fd = _objective(p, d)
        iterations += 1
    mu_star = 0.5 * (a + b)
    point = secure_rate(p.with_mu(mu_star))
    if point.secure_rate_hz <= 0.0:
        # The refined midpoint can only degrade below zero on a pathological
        # objective; report the best grid point instead.
        mu_star = grid[best]
        point = secure_rate(p.with_mu(mu_star))
    return OptimizeResult(mu_star=mu_star, rate_point=point, iterations=iterations, converged=True)


def max_distance(
    p: LinkParams,
    tol_km: float = 0.1,
    dispersion: tuple[DispersionSpec, PulseShape] | None = None,
) -> float:
    """Largest fiber length with a positive secure rate at optimal mu.

    Bisects the predicate "optimal_mu succeeds" over [0, 1000] km.  Any
    measured-loss override on ``p`` is cleared, since probes must rescale the
    loss with length.  Raises :class:`NoPositiveRate` if the link is already
    insecure at zero length and :class:`NoSolution` if 1000 km is still
    secure (unphysical for this receiver: the loss model is then degenerate).
    """
    if tol_km <= 0:
        raise ValueError(f"tol_km must be > 0, got {tol_km}")

    def secure_at(length_km: float) -> bool:
        probe = p.at_length(length_km)
        if dispersion is not None:
            probe = effective_params(probe, dispersion[0], dispersion[1])
        try:
            optimal_mu(probe)
            return True
        except NoPositiveRate:
            return False

    if not secure_at(0.0):
        raise NoPositiveRate("no positive secure rate even at zero fiber length")
    if secure_at(MAX_DISTANCE_BRACKET_KM):
        raise NoSolution(
            f"still secure at the {MAX_DISTANCE_BRACKET_KM:.0f} km bracket cap; "
            "check the loss parameters"
        )
    lo, hi = 0.0, MAX_DISTANCE_BRACKET_KM
    while hi - lo > tol_km:
        mid = 0.5 * (lo + hi)
        if secure_at(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sweep(
    p: LinkParams,
    lengths_km: list[float],
    mu_policy: Literal["fixed", "optimal"] = "fixed",
    dispersion: tuple[DispersionSpec, PulseShape] | None = None,
) -> SweepTable:
    """One rate point per length, with mu fixed by schedule or re-optimized.

    Lengths must be sorted ascending.  Any measured-loss override on ``p`` is
    cleared (it belongs to a single measured length, not a sweep).  Points
    beyond the secure boundary fall back to the scheduled mu and carry the
    ``insecure`` flag, so tables across the boundary stay complete.
    """
    if list(lengths_km) != sorted(lengths_km):
        raise ValueError("lengths_km must be sorted ascending")
    if mu_policy not in ("fixed", "optimal"):
        raise ValueError(f"unknown mu_policy {mu_policy!r}")
    rows = []
    for length in lengths_km:
        base = p.at_length(length)
        if dispersion is not None:
            base = effective_params(base, dispersion[0], dispersion[1])
        mu = mu_schedule(length)
        if mu_policy == "optimal":
            try:
                result = optimal_mu(base)
                rows.append(SweepRow(length, result.mu_star, result.rate_point))
                continue
            except NoPositiveRate:
                pass
        rows.append(SweepRow(length, mu, secure_rate(base.with_mu(mu))))
    return SweepTable(rows=tuple(rows))
