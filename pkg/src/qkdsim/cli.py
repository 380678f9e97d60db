"""qkdsim command line: rate sweeps, mu optimization, distance limits,
Monte Carlo runs and dispersion calibration.

Data outputs (CSV) are byte-stable for fixed inputs; wall-clock metadata goes
to a ``.meta.json`` sidecar next to the CSV.  Exit codes: 0 success, 1
runtime/domain failure (including a failed model-vs-simulation check), 2
configuration or usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .config import DEFAULT_CONFIG_PATH, RunConfig, load_config
from .dispersion import broadened_pulse, calibrate_linewidth, effective_params, window_fraction
from .errors import QkdSimError
from .model import secure_rate
from .montecarlo import SimConfig, compare_with_analytic, simulate
from .optimize import max_distance, optimal_mu, sweep

RATES_HEADER = (
    "length_km,total_loss_db,mu,eta,p_signal,p_dark,p_click,qber,"
    "sifted_rate_hz,secure_fraction,secure_rate_hz,insecure"
)
SIMULATE_HEADER = (
    "n_slots,seed,engine,n_registered,n_lost_deadtime,sifted_bits,error_bits,"
    "qber_est,qber_se,click_fraction,z_click,z_qber,verdict"
)


def _num(x: float) -> str:
    """Scientific notation with 10 significant digits (schema asks >= 9)."""
    return f"{x:.9e}"


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _write_sidecar(out: str | None, meta: dict) -> None:
    if out is not None:
        Path(out + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def _dispersion_pair(cfg: RunConfig, args):
    """The (spec, pulse) pair with the spec switched on, or None when off."""
    if args.dispersion != "on":
        return None
    return replace(cfg.dispersion_spec, enabled=True), cfg.pulse


def _sweep_lengths(min_km: float, max_km: float, step_km: float) -> list[float]:
    n = int(math.floor((max_km - min_km) / step_km + 1e-9))
    return [min_km + i * step_km for i in range(n + 1)]


def cmd_rates(cfg: RunConfig, args) -> int:
    if not (0 <= args.min_km <= args.max_km and args.step_km > 0):
        raise QkdSimError("need 0 <= min-km <= max-km and step-km > 0")
    lengths = _sweep_lengths(args.min_km, args.max_km, args.step_km)
    table = sweep(cfg.params, lengths, mu_policy=args.mu_policy,
                  dispersion=_dispersion_pair(cfg, args))
    lines = [RATES_HEADER]
    for row in table.rows:
        pt = row.point
        lines.append(",".join([
            _num(row.length_km),
            _num(pt.total_loss_db),
            _num(row.mu),
            _num(pt.eta),
            _num(pt.p_signal),
            _num(pt.p_dark),
            _num(pt.p_click),
            _num(pt.qber),
            _num(pt.sifted_rate_hz),
            _num(pt.secure_fraction),
            _num(pt.secure_rate_hz),
            "true" if pt.insecure else "false",
        ]))
    _write_output("\n".join(lines) + "\n", args.out)
    return 0


def cmd_optimize_mu(cfg: RunConfig, args) -> int:
    params = cfg.params
    pair = _dispersion_pair(cfg, args)
    if pair is not None:
        params = effective_params(params, *pair)
    result = optimal_mu(params)
    pt = result.rate_point
    print(
        f"length_km={params.fiber_length_km:g} total_loss_db={pt.total_loss_db:g} "
        f"mu_star={result.mu_star:.6f} secure_rate_hz={pt.secure_rate_hz:.6e} "
        f"qber={pt.qber:.6e}"
    )
    return 0


def cmd_max_distance(cfg: RunConfig, args) -> int:
    km = max_distance(cfg.params, dispersion=_dispersion_pair(cfg, args))
    print(f"max_distance_km={km:.1f}")
    return 0


def cmd_simulate(cfg: RunConfig, args) -> int:
    engine = {"per-slot": "per_slot", "gap": "gap_sampling"}[args.engine]
    sim_cfg = SimConfig(
        params=cfg.params,
        n_slots=args.slots,
        seed=args.seed,
        dispersion=_dispersion_pair(cfg, args),
        engine=engine,
    )
    stats = simulate(sim_cfg, workers=args.workers)
    report = compare_with_analytic(stats, sim_cfg.effective_link())

    def z(value: float | None) -> str:
        return _num(value) if value is not None else "nan"

    lines = [SIMULATE_HEADER, ",".join([
        str(stats.n_slots),
        str(args.seed),
        stats.engine,
        str(stats.n_registered),
        str(stats.n_lost_to_deadtime),
        str(stats.sifted_bits),
        str(stats.error_bits),
        _num(stats.qber_estimate),
        _num(stats.qber_se),
        _num(stats.click_fraction),
        z(report.z_click),
        z(report.z_qber),
        report.verdict,
    ])]
    _write_output("\n".join(lines) + "\n", args.out)
    _write_sidecar(args.out, {
        "elapsed_s": stats.elapsed_s,
        "workers": args.workers,
        "engine_requested": engine,
        "engine_used": stats.engine,
        "dispersion": args.dispersion,
    })
    report_line = (
        f"verdict={report.verdict} z_click={report.z_click} z_qber={report.z_qber} "
        f"z_deadtime={report.z_deadtime} elapsed_s={stats.elapsed_s:.2f}"
    )
    print(report_line, file=sys.stderr if args.out is None else sys.stdout)
    return 0 if report.verdict != "fail" else 1


def cmd_calibrate_dispersion(cfg: RunConfig, args) -> int:
    params = cfg.params
    linewidth = calibrate_linewidth(
        params, cfg.pulse, cfg.dispersion_spec, params.fiber_length_km, args.target_factor
    )
    spec = replace(cfg.dispersion_spec, linewidth_nm=linewidth, enabled=True)
    out = broadened_pulse(cfg.pulse, spec, params.fiber_length_km)
    achieved = window_fraction(out, params.time_window_s) / window_fraction(
        cfg.pulse, params.time_window_s
    )
    print(
        f"length_km={params.fiber_length_km:g} linewidth_nm={linewidth:.6f} "
        f"achieved_factor={achieved:.6f} fwhm_out_ps={out.fwhm_s * 1e12:.2f}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkdsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, length: bool = True) -> None:
        p.add_argument("--config", default=str(DEFAULT_CONFIG_PATH),
                       help="TOML config file (default: bundled paper.toml)")
        p.add_argument("--out", default=None, help="CSV output path (default: stdout)")
        p.add_argument("--dispersion", choices=("on", "off"), default="off")
        if length:
            p.add_argument("--length-km", type=float, default=None,
                           help="override fiber.length_km")

    p = sub.add_parser("rates", help="rate table over a span of fiber lengths")
    add_common(p, length=False)
    p.add_argument("--min-km", type=float, default=0.0)
    p.add_argument("--max-km", type=float, default=290.0)
    p.add_argument("--step-km", type=float, default=1.0)
    p.add_argument("--mu-policy", choices=("fixed", "optimal"), default="fixed")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("optimize-mu", help="best mean photon number at one length")
    add_common(p)
    p.set_defaults(func=cmd_optimize_mu)

    p = sub.add_parser("max-distance", help="largest length with positive secure rate")
    add_common(p, length=False)
    p.set_defaults(func=cmd_max_distance)

    p = sub.add_parser("simulate", help="Monte Carlo run checked against the model")
    add_common(p)
    p.add_argument("--slots", type=int, default=10**7)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--engine", choices=("per-slot", "gap"), default="per-slot")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate-dispersion", help="fit the source linewidth to a "
                       "relative efficiency factor")
    add_common(p)
    p.add_argument("--target-factor", type=float, required=True)
    p.set_defaults(func=cmd_calibrate_dispersion)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides: dict[str, float] = {}
    if getattr(args, "length_km", None) is not None:
        overrides["fiber.length_km"] = args.length_km
    try:
        cfg = load_config(args.config, overrides)
    except QkdSimError as exc:
        print(f"qkdsim: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(cfg, args)
    except QkdSimError as exc:
        print(f"qkdsim: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
