"""Command-line front end: ``swarmlink <command> --scenario FILE --out CSV``."""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import simulator as sim
from .geometry import GeometryError
from .scenario import ScenarioError, load_scenario, with_overrides

COMMANDS = ("dsopt", "distance-sweep", "power-sweep", "pass-average", "beampattern", "snapshot")
RATE_UNIT = "bit/s/Hz"


class NonFiniteResult(RuntimeError):
    pass


@dataclass
class ResultTable:
    columns: list
    units: list
    rows: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.columns) != len(self.units):
            raise ValueError("one unit per column")

    def add(self, values) -> None:
        values = [float(v) for v in values]
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} cells, table has {len(self.columns)} columns")
        self.rows.append(values)

    def check_finite(self) -> None:
        for i, row in enumerate(self.rows):
            for name, v in zip(self.columns, row):
                if not math.isfinite(v):
                    raise NonFiniteResult(f"row {i + 1}, column {name!r} is {v}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerow(self.units)
        for row in self.rows:
            w.writerow([f"{v:.9g}" for v in row])
        return buf.getvalue()


def _rate_columns(methods):
    cols, units = [], []
    for m in methods:
        cols += [m, f"{m}_stderr"]
        units += [RATE_UNIT, RATE_UNIT]
    return cols, units


def _rate_cells(methods, results):
    cells = []
    for m in methods:
        cells += [results[m].mean, results[m].stderr]
    return cells


def _sweep_table(cfg, label, unit, rows, log) -> ResultTable:
    cols, units = _rate_columns(cfg.methods)
    table = ResultTable([label, "trials"] + cols, [unit, "1"] + units)
    for row in rows:
        if not row.feasible:
            log(f"skipped {label} = {row.value:.9g} {unit}: {row.note}")
            continue
        trials = row.results[cfg.methods[0]].trials
        table.add([row.value, trials] + _rate_cells(cfg.methods, row.results))
    if not table.rows:
        raise GeometryError(f"no feasible {label} in the sweep")
    return table


def cmd_dsopt(cfg, log) -> ResultTable:
    d = sim.dsopt(cfg)
    log(f"D_S,opt at {math.degrees(cfg.mean_elevation):.6g} deg: {d / 1e3:.6g} km")
    table = ResultTable(["mean_elevation", "nu_d_rx", "n_rx_x", "dsopt"], ["deg", "rad", "1", "m"])
    table.add([math.degrees(cfg.mean_elevation), cfg.nu * cfg.rx_array.spacing, cfg.rx_array.nx, d])
    return table


def cmd_distance_sweep(cfg, log) -> ResultTable:
    distances = cfg.distances or (cfg.spacing,)
    table = _sweep_table(cfg, "distance", "m", sim.sweep_distance(cfg, distances), log)
    log(f"distance sweep: {len(table.rows)} points, {cfg.trials} trials each")
    return table


def cmd_power_sweep(cfg, log) -> ResultTable:
    powers = cfg.powers or (cfg.tx_power,)
    table = _sweep_table(cfg, "tx_power", "W", sim.sweep_power(cfg, powers), log)
    log(f"power sweep: {len(table.rows)} points, {cfg.trials} trials each")
    return table


def cmd_pass_average(cfg, log) -> ResultTable:
    distances = cfg.distances or (cfg.spacing,)
    rows = sim.sweep_pass_distance(cfg, distances, cfg.pass_samples)
    table = _sweep_table(cfg, "distance", "m", rows, log)
    log(f"pass average: {cfg.pass_samples} elevation samples x {cfg.trials} trials per distance")
    return table


def cmd_beampattern(cfg, log) -> ResultTable:
    angles, powers = sim.beampattern_table(cfg)
    table = ResultTable(["angle", "heuristic", "expected_steering", "robust"],
                        ["deg", "W", "W", "W"])
    for i, a in enumerate(angles):
        table.add([math.degrees(a), powers["heuristic"][i], powers["expected"][i],
                   powers["robust"][i]])
    for name, p in powers.items():
        log(f"{name}: peak {p.max():.6g} W, half-power width "
            f"{math.degrees(sim.half_power_beamwidth(angles, p)):.4g} deg")
    return table


def cmd_snapshot(cfg, log) -> ResultTable:
    swarm = sim.scenario_swarm(cfg)
    rng = sim.trial_rng(cfg.seed, sim._point_key(cfg, swarm), 0)
    rates = sim.run_snapshot(cfg, rng, swarm)
    table = ResultTable(list(cfg.methods), [RATE_UNIT] * len(cfg.methods))
    table.add([rates[m] for m in cfg.methods])
    log("snapshot: " + ", ".join(f"{m} {rates[m]:.6g}" for m in cfg.methods))
    return table


HANDLERS = {
    "dsopt": cmd_dsopt,
    "distance-sweep": cmd_distance_sweep,
    "power-sweep": cmd_power_sweep,
    "pass-average": cmd_pass_average,
    "beampattern": cmd_beampattern,
    "snapshot": cmd_snapshot,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swarmlink", description=__doc__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, type=Path, help="YAML scenario file")
    p.add_argument("--out", required=True, type=Path, help="CSV output path")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--trials", type=int, default=None, help="override the trial count")
    return p


def run(command: str, scenario, out, seed=None, trials=None, stdout=None, stderr=None) -> int:
    """Execute one command and write its CSV; returns the process exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr

    def log(msg):
        print(msg, file=stdout)

    def fail(msg, code=1):
        print(f"swarmlink {command}: error: {msg}", file=stderr)
        return code

    if command not in HANDLERS:
        return fail(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}", 2)
    if trials is not None and trials < 1:
        return fail("--trials must be >= 1", 2)
    try:
        cfg = with_overrides(load_scenario(scenario), seed, trials)
        table = HANDLERS[command](cfg, log)
        table.check_finite()
    except ScenarioError as exc:
        return fail(str(exc))
    except GeometryError as exc:
        return fail(f"infeasible geometry: {exc}")
    except NonFiniteResult as exc:
        return fail(f"non-finite result, no CSV written: {exc}", 3)
    except (ValueError, np.linalg.LinAlgError) as exc:
        return fail(str(exc))
    try:
        Path(out).write_text(table.to_csv(), encoding="utf-8")
    except OSError as exc:
        return fail(f"cannot write {out}: {exc.strerror}")
    log(f"wrote {len(table.rows)} rows to {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.scenario, args.out, args.seed, args.trials)


if __name__ == "__main__":
    sys.exit(main())
