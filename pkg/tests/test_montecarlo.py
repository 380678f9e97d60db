"""Monte Carlo engine tests.

The closed-form model is the oracle: empirical fractions must sit within
binomial error bars of Eqs-level expectations, and the two engines must agree
with each other.  All runs are seeded; everything here is deterministic.
"""
import dataclasses
import math

import pytest

from qkdsim.dispersion import DispersionSpec, PulseShape
from qkdsim.errors import ParameterError, RequiresSmallP
from qkdsim.model import click_probability
from qkdsim.montecarlo import (
    SimConfig,
    compare_with_analytic,
    simulate,
    simulate_gap_sampled,
)

from test_model import reference_link


def cfg50(n_slots=4_000_000, seed=11, **kw):
    return SimConfig(params=reference_link(length_km=50.0, mu=0.19), n_slots=n_slots, seed=seed, **kw)


# --- trivial limits ----------------------------------------------------------

def test_no_source_no_dark_zero_clicks():
    p = reference_link(detector_efficiency=0.0, dark_rate_hz=0.0)
    stats = simulate(SimConfig(params=p, n_slots=2_000_000, seed=1))
    assert stats.n_arrivals == 0
    assert stats.sifted_bits == 0
    assert math.isnan(stats.qber_estimate)
    report = compare_with_analytic(stats, p)
    assert report.verdict == "inconclusive"


def test_noiseless_channel_zero_errors():
    p = reference_link(length_km=0.0, baseline_error=0.0, dark_rate_hz=0.0)
    stats = simulate(SimConfig(params=p, n_slots=2_000_000, seed=2))
    assert stats.sifted_bits > 0
    assert stats.error_bits == 0


def test_dark_only_qber_is_half():
    p = reference_link(detector_efficiency=0.0, dark_rate_hz=1e7)  # p_dark = 4e-3
    stats = simulate(SimConfig(params=p, n_slots=4_000_000, seed=3))
    assert stats.n_signal_clicks == 0
    assert stats.sifted_bits > 5000
    assert abs(stats.qber_estimate - 0.5) < 3 * stats.qber_se


def test_registered_fraction_without_dead_time():
    # n_slots >= 1e6 / p_click with a bright link
    p = reference_link(
        length_km=0.0, mu=0.49, insertion_loss_db=0.0, detector_efficiency=1.0,
        dead_time_s=0.0, dark_rate_hz=0.0,
    )
    _, _, p_click = click_probability(p)
    n = int(1e6 / p_click) + 1
    stats = simulate(SimConfig(params=p, n_slots=n, seed=4))
    assert stats.n_lost_to_deadtime == 0
    se = math.sqrt(p_click * (1 - p_click) / n)
    assert abs(stats.click_fraction - p_click) < 3 * se


# --- tallies consistency ------------------------------------------------------

def test_tally_invariants():
    stats = simulate(cfg50())
    assert stats.n_registered <= stats.n_signal_clicks + stats.n_dark_clicks
    assert stats.error_bits <= stats.sifted_bits
    assert stats.sifted_bits <= stats.n_registered
    assert stats.n_arrivals == stats.n_registered + stats.n_lost_to_deadtime
    assert stats.sifted_rate_hz_estimate == pytest.approx(
        stats.sifted_bits / stats.n_slots * 2e9
    )


# --- model agreement ---------------------------------------------------------

def test_per_slot_matches_model_50km():
    stats = simulate(cfg50(n_slots=10_000_000, seed=5), workers=2)
    report = compare_with_analytic(stats, cfg50().params)
    assert report.verdict == "pass", report
    assert abs(report.z_click) < 4
    assert abs(report.z_qber) < 4
    assert abs(report.z_deadtime) < 4


def test_gap_matches_model_50km():
    stats = simulate_gap_sampled(cfg50(n_slots=10_000_000, seed=6, engine="gap_sampling"))
    report = compare_with_analytic(stats, cfg50().params)
    assert report.verdict == "pass", report


def test_engines_agree():
    per = simulate(cfg50(n_slots=10_000_000, seed=7))
    gap = simulate_gap_sampled(cfg50(n_slots=10_000_000, seed=8, engine="gap_sampling"))
    _, _, p_click = click_probability(cfg50().params)
    se_click = math.sqrt(2 * p_click * (1 - p_click) / per.n_slots)
    assert abs(per.click_fraction - gap.click_fraction) < 4 * se_click
    e = (per.qber_estimate + gap.qber_estimate) / 2
    se_qber = math.sqrt(e * (1 - e) * (1 / per.sifted_bits + 1 / gap.sifted_bits))
    assert abs(per.qber_estimate - gap.qber_estimate) < 4 * se_qber


def test_deadtime_loss_visible_when_bright():
    # ~0.44% of slots click at 10 km; 30-slot paralyzable dead time must eat
    # a measurable share and stay near the exponential factor
    p = reference_link(length_km=10.0, mu=0.19)
    stats = simulate(SimConfig(params=p, n_slots=10_000_000, seed=9), workers=2)
    assert stats.n_lost_to_deadtime > 0
    report = compare_with_analytic(stats, p)
    assert report.verdict == "pass"
    g = stats.n_registered / stats.n_arrivals
    assert g == pytest.approx(report.deadtime_factor_expected, rel=0.01)


# --- determinism -------------------------------------------------------------

def test_bit_identical_across_workers():
    base = None
    for workers in (1, 2, 4):
        stats = simulate(cfg50(n_slots=10_000_000, seed=10), workers=workers)
        if base is None:
            base = stats
        else:
            assert stats == base  # elapsed_s excluded from comparison


def test_repeated_run_identical():
    a = simulate(cfg50(seed=12))
    b = simulate(cfg50(seed=12))
    assert a == b
    c = simulate(cfg50(seed=13))
    assert c != a


def test_gap_repeated_run_identical():
    a = simulate_gap_sampled(cfg50(seed=14, engine="gap_sampling"))
    b = simulate_gap_sampled(cfg50(seed=14, engine="gap_sampling"))
    assert a == b


# --- engine selection --------------------------------------------------------

def bright_link():
    # p_click ~ 1.6e-2 > the 1% gap-sampling ceiling
    return reference_link(length_km=0.0, detector_efficiency=0.112)


def test_gap_sampled_rejects_large_p():
    cfg = SimConfig(params=bright_link(), n_slots=2_000_000, seed=15, engine="gap_sampling")
    with pytest.raises(RequiresSmallP):
        simulate_gap_sampled(cfg)


def test_simulate_falls_back_to_per_slot():
    cfg = SimConfig(params=bright_link(), n_slots=2_000_000, seed=15, engine="gap_sampling")
    stats = simulate(cfg)
    assert stats.engine == "per_slot"
    direct = simulate(dataclasses.replace(cfg, engine="per_slot"))
    assert stats == direct


def test_gap_empty_when_no_clicks():
    p = reference_link(detector_efficiency=0.0, dark_rate_hz=0.0)
    stats = simulate_gap_sampled(SimConfig(params=p, n_slots=2_000_000, seed=16, engine="gap_sampling"))
    assert stats.n_arrivals == 0


# --- dispersion plumbing -----------------------------------------------------

def test_dispersion_equivalent_to_effective_params():
    from qkdsim.dispersion import effective_params

    p = reference_link(length_km=205.0)
    spec = DispersionSpec(17.0, 0.0512)
    shape = PulseShape(fwhm_s=170e-12)
    via_cfg = simulate(SimConfig(params=p, n_slots=2_000_000, seed=17, dispersion=(spec, shape)))
    direct = simulate(SimConfig(params=effective_params(p, spec, shape), n_slots=2_000_000, seed=17))
    assert via_cfg == direct


# --- comparison report -------------------------------------------------------

def test_compare_detects_wrong_baseline_error():
    stats = simulate(cfg50(n_slots=10_000_000, seed=18))
    doubled = dataclasses.replace(cfg50().params, baseline_error=0.036)
    report = compare_with_analytic(stats, doubled)
    assert report.z_qber is not None and abs(report.z_qber) >= 4
    assert report.verdict == "fail"


def test_compare_zero_deadtime_reference():
    p = reference_link(length_km=50.0, mu=0.19, dead_time_s=0.0)
    stats = simulate(SimConfig(params=p, n_slots=2_000_000, seed=19))
    report = compare_with_analytic(stats, p)
    assert report.z_deadtime == 0.0


# --- config validation -------------------------------------------------------

def test_sim_config_validation():
    p = reference_link()
    with pytest.raises(ParameterError):
        SimConfig(params=p, n_slots=0, seed=1)
    with pytest.raises(ParameterError):
        SimConfig(params=p, n_slots=10, seed=1, chunk_slots=1000)
    with pytest.raises(ParameterError):
        SimConfig(params=p, n_slots=10, seed=-1)
    with pytest.raises(ParameterError):
        SimConfig(params=p, n_slots=10, seed=1, engine="magic")
