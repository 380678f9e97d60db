"""Event-level simulation of the DPS-QKD protocol.

Slots tick at the clock rate.  Alice draws a phase from {-pi/2, +pi/2} per
pulse; her key bit is the phase difference between adjacent pulses (0 -> bit
0, pi -> bit 1).  Bob's interferometer output clicks detector D0 for
difference 0 and D1 for difference pi, wrong detector with the baseline error
probability; both detectors also dark-click independently.  Every arrival
(registered or not) extends the paralyzable dead time, arrivals inside it are
lost.  Clicks in the first slot of a chunk have no predecessor pulse and are
never sifted.

Work is split into fixed-size chunks whose RNG substreams derive from
(seed, chunk index), so tallies are bit-identical for any worker count.
Dead-time and phase state reset at chunk boundaries, which biases the
dead-time loss by less than dead_slots/chunk_slots in relative terms.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .dispersion import DispersionSpec, PulseShape, effective_params
from .errors import ParameterError, RequiresSmallP
from .model import LinkParams, click_probability, qber

GAP_ENGINE_MAX_P = 0.01
_GAP_BLOCK = 4096

Engine = Literal["per_slot", "gap_sampling"]


@dataclass(frozen=True)
class SimConfig:
    params: LinkParams
    n_slots: int
    seed: int
    chunk_slots: int = 1 << 22
    dispersion: tuple[DispersionSpec, PulseShape] | None = None
    engine: Engine = "per_slot"

    def __post_init__(self):
        if self.n_slots < 1:
            raise ParameterError(f"n_slots must be >= 1, got {self.n_slots}")
        if self.chunk_slots < 10**6:
            raise ParameterError(f"chunk_slots must be >= 1e6, got {self.chunk_slots}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if self.engine not in ("per_slot", "gap_sampling"):
            raise ParameterError(f"unknown engine {self.engine!r}")

    def effective_link(self) -> LinkParams:
        if self.dispersion is None:
            return self.params
        spec, shape = self.dispersion
        return effective_params(self.params, spec, shape)


@dataclass(frozen=True)
class SimStats:
    """Monte Carlo tallies and the estimates derived from them.

    ``n_signal_clicks`` / ``n_dark_clicks`` count click causes (a slot can
    hold several), ground truth a real receiver never sees; diagnostics only.
    ``elapsed_s`` is excluded from equality so that identical configurations
    compare equal regardless of wall time.
    """

    n_slots: int
    engine: Engine
    n_signal_clicks: int
    n_dark_clicks: int
    n_registered: int
    n_lost_to_deadtime: int
    sifted_bits: int
    error_bits: int
    qber_estimate: float
    qber_se: float
    sifted_rate_hz_estimate: float
    elapsed_s: float = field(compare=False)

    @property
    def n_arrivals(self) -> int:
        return self.n_registered + self.n_lost_to_deadtime

    @property
    def click_fraction(self) -> float:
        return self.n_arrivals / self.n_slots


@dataclass(frozen=True)
class ComparisonReport:
    """z-scores of a finished run against the closed-form model."""

    p_click_expected: float
    qber_expected: float
    deadtime_factor_expected: float
    z_click: float | None
    z_qber: float | None
    z_deadtime: float | None
    verdict: Literal["pass", "fail", "inconclusive"]


_Tallies = tuple[int, int, int, int, int, int]  # signal, dark, arrivals, registered, sifted, errors


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(chunk_index,)))


def _dead_slots(p: LinkParams) -> int:
    exact = p.dead_time_s * p.clock_rate_hz
    return max(0, math.ceil(exact - 1e-9))


def _registered_mask(positions: np.ndarray, dead_slots: int) -> np.ndarray:
    """Paralyzable dead time: an arrival registers iff the gap from the
    previous arrival (registered or not) is at least ``dead_slots``."""
    n = positions.size
    mask = np.ones(n, dtype=bool)
    if dead_slots > 0 and n > 1:
        mask[1:] = np.diff(positions) >= dead_slots
    return mask


def _sift(positions, registered_mask, alice, bob1) -> tuple[int, int]:
    usable = registered_mask & (positions != 0)
    sifted = int(np.count_nonzero(usable))
    errors = int(np.count_nonzero(usable & (bob1 != alice)))
    return sifted, errors


def _per_slot_chunk(args) -> _Tallies:
    seed, chunk_index, m, p_signal, dark_each, e_s, dead_slots = args
    rng = _chunk_rng(seed, chunk_index)
    phase = rng.random(m) < 0.5
    sig = rng.random(m) < p_signal
    wrong = rng.random(m) < e_s
    dark0 = rng.random(m) < dark_each
    dark1 = rng.random(m) < dark_each
    tie = rng.random(m)

    alice = np.empty(m, dtype=bool)
    alice[0] = phase[0]  # placeholder; slot 0 is never sifted
    np.not_equal(phase[1:], phase[:-1], out=alice[1:])
    det1 = alice ^ wrong
    c0 = dark0 | (sig & ~det1)
    c1 = dark1 | (sig & det1)

    positions = np.flatnonzero(c0 | c1)
    n_signal = int(np.count_nonzero(sig))
    n_dark = int(np.count_nonzero(dark0)) + int(np.count_nonzero(dark1))
    if positions.size == 0:
        return n_signal, n_dark, 0, 0, 0, 0

    reg_mask = _registered_mask(positions, dead_slots)
    reg = positions[reg_mask]
    both = c0[reg] & c1[reg]
    bob1 = np.where(both, tie[reg] < 0.5, c1[reg])
    sifted, errors = _sift(reg, np.ones(reg.size, dtype=bool), alice[reg], bob1)
    return n_signal, n_dark, int(positions.size), int(reg.size), sifted, errors


def _gap_chunk(args) -> _Tallies:
    seed, chunk_index, m, p_signal, p_dark, e_s, dead_slots = args
    p_click = p_signal + p_dark
    if p_click <= 0.0:
        return 0, 0, 0, 0, 0, 0
    rng = _chunk_rng(seed, chunk_index)

    # Geometric inter-click gaps; memorylessness makes the per-chunk restart
    # exactly equivalent to one long stream.
    pieces = []
    last = -1
    while True:
        cum = last + np.cumsum(rng.geometric(p_click, size=_GAP_BLOCK))
        pieces.append(cum[cum < m])
        if cum[-1] >= m:
            break
        last = int(cum[-1])
    positions = np.concatenate(pieces)
    k = positions.size
    if k == 0:
        return 0, 0, 0, 0, 0, 0

    u_type = rng.random(k)
    u_alice = rng.random(k)
    u_det = rng.random(k)
    is_signal = u_type < p_signal / p_click
    alice = u_alice < 0.5
    # Signal clicks follow Alice's bit (flipped with the baseline error);
    # dark clicks land on a uniformly random detector.
    bob1 = np.where(is_signal, alice ^ (u_det < e_s), u_det < 0.5)

    reg_mask = _registered_mask(positions, dead_slots)
    n_signal = int(np.count_nonzero(is_signal))
    sifted, errors = _sift(positions, reg_mask, alice, bob1)
    return n_signal, k - n_signal, k, int(np.count_nonzero(reg_mask)), sifted, errors


def _run_chunks(cfg: SimConfig, engine: Engine, workers: int) -> list[_Tallies]:
    p = cfg.effective_link()
    p_signal, p_dark, _ = click_probability(p)
    dead_slots = _dead_slots(p)
    n_chunks = -(-cfg.n_slots // cfg.chunk_slots)
    worker = _per_slot_chunk if engine == "per_slot" else _gap_chunk
    dark_arg = p_dark / 2.0 if engine == "per_slot" else p_dark
    jobs = []
    for i in range(n_chunks):
        m = min(cfg.chunk_slots, cfg.n_slots - i * cfg.chunk_slots)
        jobs.append((cfg.seed, i, m, p_signal, dark_arg, p.baseline_error, dead_slots))
    if workers <= 1 or n_chunks == 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, jobs, chunksize=max(1, n_chunks // (4 * workers))))


def _stats_from_tallies(cfg: SimConfig, engine: Engine, tallies, elapsed_s: float) -> SimStats:
    p = cfg.effective_link()
    sums = [sum(t[i] for t in tallies) for i in range(6)]
    n_signal, n_dark, arrivals, registered, sifted, errors = sums
    if sifted > 0:
        e_hat = errors / sifted
        se = math.sqrt(e_hat * (1.0 - e_hat) / sifted)
    else:
        e_hat = math.nan
        se = math.nan
    return SimStats(
        n_slots=cfg.n_slots,
        engine=engine,
        n_signal_clicks=n_signal,
        n_dark_clicks=n_dark,
        n_registered=registered,
        n_lost_to_deadtime=arrivals - registered,
        sifted_bits=sifted,
        error_bits=errors,
        qber_estimate=e_hat,
        qber_se=se,
        sifted_rate_hz_estimate=p.clock_rate_hz * sifted / cfg.n_slots,
        elapsed_s=elapsed_s,
    )


def simulate(cfg: SimConfig, workers: int = 1) -> SimStats:
    """Run the configured engine; results depend only on
    (seed, n_slots, chunk_slots, engine), never on ``workers``.

    A gap-sampling request with too large a click probability falls back to
    the per-slot engine (reflected in ``SimStats.engine``).
    """
    start = time.perf_counter()
    engine: Engine = cfg.engine
    if engine == "gap_sampling":
        _, _, p_click = click_probability(cfg.effective_link())
        if p_click > GAP_ENGINE_MAX_P:
            engine = "per_slot"
    tallies = _run_chunks(cfg, engine, workers)
    return _stats_from_tallies(cfg, engine, tallies, time.perf_counter() - start)


def simulate_gap_sampled(cfg: SimConfig, workers: int = 1) -> SimStats:
    """Gap-sampling engine without the fallback: raises
    :class:`RequiresSmallP` when p_click exceeds 1%."""
    _, _, p_click = click_probability(cfg.effective_link())
    if p_click > GAP_ENGINE_MAX_P:
        raise RequiresSmallP(
            f"gap sampling needs p_click <= {GAP_ENGINE_MAX_P}, got {p_click:.3g}"
        )
    start = time.perf_counter()
    tallies = _run_chunks(cfg, "gap_sampling", workers)
    return _stats_from_tallies(cfg, "gap_sampling", tallies, time.perf_counter() - start)


def compare_with_analytic(stats: SimStats, p: LinkParams, threshold: float = 4.0) -> ComparisonReport:
    """z-scores of click fraction, QBER and dead-time loss against the model.

    Pass ``p`` exactly as the simulation consumed it (dispersion-adjusted if
    the run was).  Comparisons without enough data stay ``None`` and the
    verdict is "inconclusive" unless another one already fails.
    """
    p_signal, p_dark, p_click = click_probability(p)
    e_expected = qber(p) if p_click > 0.0 else math.nan
    g_expected = math.exp(-p.clock_rate_hz * p_click * p.dead_time_s)

    if 0.0 < p_click < 1.0:
        se = math.sqrt(p_click * (1.0 - p_click) / stats.n_slots)
        z_click = (stats.click_fraction - p_click) / se
    elif p_click == 0.0:
        z_click = None if stats.n_arrivals == 0 else math.inf
    else:
        z_click = None

    if stats.sifted_bits > 0 and 0.0 < e_expected < 1.0:
        se = math.sqrt(e_expected * (1.0 - e_expected) / stats.sifted_bits)
        z_qber = (stats.qber_estimate - e_expected) / se
    elif stats.sifted_bits > 0 and e_expected == 0.0:
        z_qber = 0.0 if stats.error_bits == 0 else math.inf
    else:
        z_qber = None

    if stats.n_arrivals == 0:
        z_deadtime = None
    elif g_expected >= 1.0:
        z_deadtime = 0.0 if stats.n_lost_to_deadtime == 0 else math.inf
    else:
        g_observed = stats.n_registered / stats.n_arrivals
        se = math.sqrt(g_expected * (1.0 - g_expected) / stats.n_arrivals)
        z_deadtime = (g_observed - g_expected) / se

    scores = (z_click, z_qber, z_deadtime)
    if any(z is not None and abs(z) >= threshold for z in scores):
        verdict = "fail"
    elif any(z is None for z in scores):
        verdict = "inconclusive"
    else:
        verdict = "pass"
    return ComparisonReport(
        p_click_expected=p_click,
        qber_expected=e_expected,
        deadtime_factor_expected=g_expected,
        z_click=z_click,
        z_qber=z_qber,
        z_deadtime=z_deadtime,
        verdict=verdict,
    )
