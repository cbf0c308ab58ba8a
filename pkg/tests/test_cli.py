import io
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from swarmlink import cli
from swarmlink.scenario import (ScenarioError, dumps_scenario, load_scenario, loads_scenario,
                                with_overrides)
from swarmlink.simulator import ScenarioConfig

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

MINIMAL = """\
seed: 5
trials: 3
swarm:
  n_sats: 2
  spacing: 12 km
arrays:
  satellite: {nx: 4, spacing: 0.5 lambda}
  receiver: {nx: 16, spacing: 0.5 lambda}
"""


def run_cli(tmp_path, command, text=MINIMAL, **kw):
    scen = tmp_path / "s.yaml"
    scen.write_text(text)
    out = tmp_path / "out.csv"
    so, se = io.StringIO(), io.StringIO()
    code = cli.run(command, scen, out, stdout=so, stderr=se, **kw)
    return code, out, so.getvalue(), se.getvalue()


def test_empty_file_lists_required_keys():
    with pytest.raises(ScenarioError) as exc:
        loads_scenario("")
    for key in ("swarm.n_sats", "swarm.spacing", "arrays.satellite", "arrays.receiver"):
        assert key in str(exc.value)


def test_unknown_key_reports_path_line_and_alternatives():
    text = MINIMAL.replace("  spacing: 12 km", "  spacing: 12 km\n  spacin: 3 km")
    with pytest.raises(ScenarioError) as exc:
        loads_scenario(text, "f.yaml")
    msg = str(exc.value)
    assert "swarm.spacin" in msg and "f.yaml:6" in msg and "mean_elevation" in msg


def test_missing_unit_is_rejected_with_line():
    with pytest.raises(ScenarioError, match=r"f.yaml:5.*unit required"):
        loads_scenario(MINIMAL.replace("12 km", "12000"), "f.yaml")


@pytest.mark.parametrize("raw, bad", [("12 parsecs", "parsecs"), ("twelve km", "twelve")])
def test_bad_quantities(raw, bad):
    with pytest.raises(ScenarioError, match=bad):
        loads_scenario(MINIMAL.replace("12 km", raw))


def test_yaml_syntax_error_has_line():
    with pytest.raises(ScenarioError, match=r"f.yaml:3: parse error"):
        loads_scenario("seed: 1\ntrials: 2\nswarm: a: b\n", "f.yaml")


def test_duplicate_key_rejected():
    with pytest.raises(ScenarioError, match="duplicate"):
        loads_scenario(MINIMAL + "seed: 6\n")


@pytest.mark.parametrize("raw, expected", [
    ("10 W", 10.0), ("10 dBW", 10.0), ("40 dBm", 10.0), ("500 mW", 0.5),
])
def test_power_units(raw, expected):
    cfg = loads_scenario(MINIMAL + f"tx_power: {raw}\n")
    assert cfg.tx_power == pytest.approx(expected)


def test_reference_ura_scenario_values():
    cfg = load_scenario(SCENARIOS / "ura_robust.yaml")
    assert (cfg.sat_array.nx, cfg.sat_array.ny, cfg.rx_array.nx, cfg.rx_array.ny) == (8, 8, 16, 16)
    assert cfg.sat_array.spacing == pytest.approx(0.06)
    assert cfg.spacing == pytest.approx(52e3)
    assert cfg.sat_error.param == cfg.rx_error.param == 1 / 16
    assert cfg.path_loss.tx_gain_db == pytest.approx(17.4)
    assert cfg.noise_power == pytest.approx(1e-12)
    assert cfg.seed == 3 and cfg.trials == 2000


@pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.yaml")))
def test_shipped_scenarios_round_trip(name):
    cfg = load_scenario(SCENARIOS / name)
    assert loads_scenario(dumps_scenario(cfg)) == cfg


def test_round_trip_tabulated_law_and_tables():
    text = MINIMAL + """\
path_loss:
  shadow_std: rural-ka
  gas_loss: [[10 deg, 1.2 dB], [90 deg, 0.2 dB]]
errors:
  satellite: {law: tabulated, values: [-0.1, 0, 0.1], density: [0, 10, 0]}
  receiver: {law: gaussian, sigma: 0.01}
"""
    cfg = loads_scenario(text)
    assert cfg.sat_error.kind == "tabulated"
    assert loads_scenario(dumps_scenario(cfg)) == cfg


def test_precedence_flags_over_file_over_defaults():
    cfg = loads_scenario(MINIMAL)
    assert cfg.seed == 5 and cfg.trials == 3
    assert cfg.tx_power == ScenarioConfig().tx_power
    cfg2 = with_overrides(cfg, seed=9, trials=7)
    assert (cfg2.seed, cfg2.trials) == (9, 7)
    assert with_overrides(cfg) is cfg


def test_snapshot_csv_has_header_units_and_is_repeatable(tmp_path):
    code, out, log, err = run_cli(tmp_path, "snapshot")
    assert code == 0, err
    first = out.read_bytes()
    lines = first.decode().splitlines()
    assert lines[0] == "capacity,geometric"
    assert lines[1] == "bit/s/Hz,bit/s/Hz"
    assert len(lines) == 3
    code, out, *_ = run_cli(tmp_path, "snapshot")
    assert out.read_bytes() == first


def test_seed_flag_changes_output(tmp_path):
    text = MINIMAL + "path_loss: {shadow_std: 3 dB}\n"
    run_cli(tmp_path, "distance-sweep", text)
    a = (tmp_path / "out.csv").read_bytes()
    run_cli(tmp_path, "distance-sweep", text, seed=77)
    assert (tmp_path / "out.csv").read_bytes() != a


def test_distance_sweep_skips_infeasible_rows(tmp_path):
    text = MINIMAL.replace("n_sats: 2", "n_sats: 3") + "sweep: {distances: [10 km, 5000 km]}\n"
    code, out, log, err = run_cli(tmp_path, "distance-sweep", text, trials=2)
    assert code == 0, err
    rows = out.read_text().splitlines()
    assert rows[0].split(",") == ["distance", "trials", "capacity", "capacity_stderr",
                                  "geometric", "geometric_stderr"]
    assert len(rows) == 3
    assert "skipped" in log


def test_dsopt_command(tmp_path):
    text = MINIMAL.replace("nx: 16", "nx: 100")
    code, out, log, _ = run_cli(tmp_path, "dsopt", text)
    assert code == 0
    row = out.read_text().splitlines()[2].split(",")
    assert float(row[3]) == pytest.approx(12002.2, abs=0.5)
    assert float(row[1]) == pytest.approx(math.pi)


def test_beampattern_columns(tmp_path):
    code, out, *_ = run_cli(tmp_path, "beampattern",
                            (SCENARIOS / "beampattern_uniform.yaml").read_text())
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "angle,heuristic,expected_steering,robust"
    assert rows[1] == "deg,W,W,W"
    assert len(rows) == 2 + 2401


def test_non_finite_result_exits_nonzero_without_csv(tmp_path, monkeypatch):
    def broken(cfg, log):
        t = cli.ResultTable(["x"], ["1"])
        t.add([float("nan")])
        return t

    monkeypatch.setitem(cli.HANDLERS, "snapshot", broken)
    code, out, _, err = run_cli(tmp_path, "snapshot")
    assert code == 3
    assert not out.exists()
    assert "non-finite" in err


def test_scenario_errors_exit_one(tmp_path):
    code, out, _, err = run_cli(tmp_path, "snapshot", "")
    assert code == 1 and "missing required keys" in err and not out.exists()


def test_bad_trials_flag_is_usage_error(tmp_path):
    assert run_cli(tmp_path, "snapshot", trials=0)[0] == 2


def test_module_entry_point(tmp_path):
    scen = tmp_path / "s.yaml"
    scen.write_text(MINIMAL)
    out = tmp_path / "o.csv"
    proc = subprocess.run([sys.executable, "-m", "swarmlink", "snapshot", "--scenario", str(scen),
                           "--out", str(out), "--seed", "2"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    values = np.array(out.read_text().splitlines()[2].split(","), dtype=float)
    assert np.all(np.isfinite(values))
