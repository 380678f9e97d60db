"""Config parsing and CLI contract tests: exit codes, schemas, byte stability."""
import json
from pathlib import Path

import pytest

from qkdsim.cli import RATES_HEADER, SIMULATE_HEADER, main
from qkdsim.config import DEFAULT_CONFIG_PATH, load_config
from qkdsim.errors import ConfigError

GOOD = DEFAULT_CONFIG_PATH.read_text()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "link.toml"
    path.write_text(GOOD)
    return str(path)


# --- load_config -------------------------------------------------------------

def test_load_bundled_defaults():
    cfg = load_config(DEFAULT_CONFIG_PATH)
    p = cfg.params
    assert p.clock_rate_hz == 2e9
    assert p.mu == 0.20
    assert p.alpha_db_per_km == 0.2
    assert p.insertion_loss_db == 1.5
    assert p.time_window_s == pytest.approx(200e-12)
    assert p.dead_time_s == pytest.approx(15e-9)
    assert p.baseline_error == 0.018
    assert p.detector_efficiency == 0.025
    assert p.dark_rate_hz == 1.0
    assert p.ec_efficiency == 1.2
    assert p.fiber_loss_db_override is None
    assert cfg.pulse.fwhm_s == pytest.approx(170e-12)
    assert cfg.dispersion_spec.coefficient_ps_per_km_nm == 17.0
    assert not cfg.dispersion_spec.enabled


def test_unknown_key_is_hard_error(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(GOOD + "\n[detector2]\nefficiency = 0.5\n")
    with pytest.raises(ConfigError, match="detector2.efficiency"):
        load_config(path)


def test_typo_key_is_hard_error(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(GOOD.replace("dark_hz", "dark_rate"))
    with pytest.raises(ConfigError, match="dark_rate"):
        load_config(path)


def test_missing_key_is_hard_error(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(GOOD.replace("ec_factor = 1.2", ""))
    with pytest.raises(ConfigError, match="security.ec_factor"):
        load_config(path)


def test_non_numeric_value_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(GOOD.replace("mu = 0.20", 'mu = "high"'))
    with pytest.raises(ConfigError, match="source.mu"):
        load_config(path)


def test_invalid_physics_maps_to_config_error(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(GOOD.replace("mu = 0.20", "mu = 0.75"))
    with pytest.raises(ConfigError, match="mu"):
        load_config(path)


def test_flag_override_wins():
    cfg = load_config(DEFAULT_CONFIG_PATH, {"fiber.length_km": 205.0})
    assert cfg.params.fiber_length_km == 205.0


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/qkd.toml")


# --- rates command -----------------------------------------------------------

def test_rates_csv_schema_and_stability(config_file, tmp_path):
    out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    argv = ["rates", "--config", config_file, "--min-km", "0", "--max-km", "100",
            "--step-km", "25", "--out"]
    assert main(argv + [out1]) == 0
    assert main(argv + [out2]) == 0
    text1 = Path(out1).read_text()
    assert text1 == Path(out2).read_text()
    lines = text1.strip().split("\n")
    assert lines[0] == RATES_HEADER
    assert len(lines) == 1 + 5  # 0,25,50,75,100
    first = lines[1].split(",")
    assert len(first) == len(RATES_HEADER.split(","))
    assert first[-1] in ("true", "false")
    # >= 9 significant digits in scientific notation
    assert "e" in first[3] and len(first[3].split("e")[0].replace("-", "").replace(".", "")) >= 9


def test_rates_single_row_cases(config_file, capsys):
    assert main(["rates", "--config", config_file, "--min-km", "50",
                 "--max-km", "50", "--step-km", "1"]) == 0
    assert len(capsys.readouterr().out.strip().split("\n")) == 2
    assert main(["rates", "--config", config_file, "--min-km", "10",
                 "--max-km", "20", "--step-km", "50"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert len(out) == 2
    assert out[1].startswith("1.000000000e+01,")


def test_rates_bad_range_fails(config_file, tmp_path):
    out = str(tmp_path / "x.csv")
    assert main(["rates", "--config", config_file, "--min-km", "50",
                 "--max-km", "10", "--step-km", "1", "--out", out]) != 0
    assert not Path(out).exists()  # no partial CSV on failure


def test_rates_crosses_zero_near_max_distance(config_file, capsys):
    assert main(["rates", "--config", config_file, "--min-km", "275",
                 "--max-km", "290", "--step-km", "1", "--mu-policy", "optimal"]) == 0
    rows = [line.split(",") for line in capsys.readouterr().out.strip().split("\n")[1:]]
    boundary = [float(r[0]) for r in rows if r[-1] == "true"]
    assert boundary and 281 <= min(boundary) <= 284


def test_rates_bad_config_exit_2(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text(GOOD + "\nunknown_key = 1\n")
    out = str(tmp_path / "x.csv")
    assert main(["rates", "--config", str(bad), "--out", out]) == 2
    assert not Path(out).exists()


def test_rates_dispersion_flag_changes_output(config_file, capsys):
    argv = ["rates", "--config", config_file, "--min-km", "205", "--max-km", "205",
            "--step-km", "1"]
    assert main(argv + ["--dispersion", "off"]) == 0
    off = capsys.readouterr().out.strip().split("\n")[1].split(",")
    assert main(argv + ["--dispersion", "on"]) == 0
    on = capsys.readouterr().out.strip().split("\n")[1].split(",")
    eta_off, eta_on = float(off[3]), float(on[3])
    # broadened pulse at 205 km loses ~20.8% of its in-window energy
    assert eta_on / eta_off == pytest.approx(0.792, abs=2e-3)
    assert float(on[10]) < float(off[10])  # secure rate drops too


# --- optimize-mu command -----------------------------------------------------

def test_optimize_mu_205(config_file, capsys):
    assert main(["optimize-mu", "--config", config_file, "--length-km", "205"]) == 0
    out = capsys.readouterr().out
    mu = float(out.split("mu_star=")[1].split()[0])
    assert mu == pytest.approx(0.19776, abs=3e-3)


def test_optimize_mu_beyond_maximum(config_file, capsys):
    assert main(["optimize-mu", "--config", config_file, "--length-km", "300"]) == 1
    assert "no positive secure rate" in capsys.readouterr().err


# --- max-distance command ----------------------------------------------------

def test_max_distance_command(config_file, capsys):
    assert main(["max-distance", "--config", config_file]) == 0
    km = float(capsys.readouterr().out.split("max_distance_km=")[1])
    assert km == pytest.approx(281.0, abs=3.0)


def test_max_distance_zero_alpha_bracket_cap(tmp_path, capsys):
    path = tmp_path / "zero.toml"
    path.write_text(GOOD.replace("alpha_db_per_km = 0.2", "alpha_db_per_km = 0.0"))
    assert main(["max-distance", "--config", str(path)]) == 1
    assert "bracket" in capsys.readouterr().err


# --- simulate command --------------------------------------------------------

def test_simulate_csv_deterministic_across_workers(config_file, tmp_path):
    outs = []
    for i, workers in enumerate((1, 2, 4)):
        out = str(tmp_path / f"sim{i}.csv")
        rc = main(["simulate", "--config", config_file, "--slots", "2000000",
                   "--seed", "5", "--workers", str(workers), "--out", out])
        assert rc == 0
        outs.append(Path(out).read_bytes())
    assert outs[0] == outs[1] == outs[2]
    lines = outs[0].decode().strip().split("\n")
    assert lines[0] == SIMULATE_HEADER
    assert lines[1].split(",")[-1] == "pass"
    meta = json.loads(Path(str(tmp_path / "sim0.csv") + ".meta.json").read_text())
    assert meta["workers"] == 1 and meta["engine_used"] == "per_slot"


def test_simulate_empty_link_inconclusive(tmp_path, capsys):
    path = tmp_path / "dead.toml"
    path.write_text(GOOD.replace("efficiency = 0.025", "efficiency = 0.0")
                        .replace("dark_hz = 1.0", "dark_hz = 0.0"))
    assert main(["simulate", "--config", str(path), "--slots", "2000000", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert out.split("\n")[1].split(",")[-1] == "inconclusive"


def test_simulate_gap_engine(config_file, capsys):
    rc = main(["simulate", "--config", config_file, "--slots", "5000000",
               "--seed", "9", "--engine", "gap"])
    assert rc == 0
    line = capsys.readouterr().out.split("\n")[1].split(",")
    assert line[2] == "gap_sampling"
    assert line[-1] == "pass"


# --- calibrate-dispersion command --------------------------------------------

def test_calibrate_dispersion_command(config_file, capsys):
    assert main(["calibrate-dispersion", "--config", config_file,
                 "--length-km", "205", "--target-factor", "0.792"]) == 0
    out = capsys.readouterr().out
    lw = float(out.split("linewidth_nm=")[1].split()[0])
    factor = float(out.split("achieved_factor=")[1].split()[0])
    assert lw == pytest.approx(0.0512, abs=5e-4)
    assert factor == pytest.approx(0.792, abs=1e-3)


def test_calibrate_dispersion_trivial_target(config_file, capsys):
    assert main(["calibrate-dispersion", "--config", config_file,
                 "--length-km", "205", "--target-factor", "1.0"]) == 0
    assert float(capsys.readouterr().out.split("linewidth_nm=")[1].split()[0]) == 0.0


def test_calibrate_dispersion_unreachable(config_file, capsys):
    assert main(["calibrate-dispersion", "--config", config_file,
                 "--length-km", "205", "--target-factor", "1.2"]) == 1
    assert "target_factor" in capsys.readouterr().err
