"""Radiation patterns of the heuristic, expected-steering and robust precoders.

Writes one CSV per error law (uniform and variance-matched Gaussian) and prints
half-power beamwidths and out-of-support power fractions.
"""
import argparse
import math
from pathlib import Path

from swarmlink.cli import ResultTable
from swarmlink.scenario import load_scenario
from swarmlink.simulator import beampattern_table, half_power_beamwidth, out_of_support_fraction

ROOT = Path(__file__).resolve().parent.parent


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", type=Path, default=ROOT / "results")
    args = p.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for law in ("uniform", "gaussian"):
        cfg = load_scenario(ROOT / "scenarios" / f"beampattern_{law}.yaml")
        angles, powers = beampattern_table(cfg)
        table = ResultTable(["angle", "heuristic", "expected_steering", "robust"], ["deg", "W", "W", "W"])
        for i, a in enumerate(angles):
            table.add([math.degrees(a), powers["heuristic"][i], powers["expected"][i], powers["robust"][i]])
        out = args.out_dir / f"beampattern_{law}.csv"
        out.write_text(table.to_csv())
        # support of a +-0.05 space-angle error around broadside
        half = math.asin(0.05)
        for name, pw in powers.items():
            print(f"{law:8s} {name:10s} HPBW {math.degrees(half_power_beamwidth(angles, pw)):.3f} deg, "
                  f"outside support {out_of_support_fraction(angles, pw, math.pi / 2, half):.4f}")
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
