"""Robust, heuristic, geometric and capacity rates versus sum transmit power (URA swarm)."""
import argparse
import sys
from pathlib import Path

from swarmlink.cli import run

ROOT = Path(__file__).resolve().parent.parent


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", type=Path, default=ROOT / "results")
    p.add_argument("--trials", type=int, default=None, help="override the scenario trial count")
    p.add_argument("--seed", type=int, default=None)
    args = p.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    return run("power-sweep", ROOT / "scenarios" / "ura_robust.yaml", args.out_dir / "power_sweep.csv",
               seed=args.seed, trials=args.trials)


if __name__ == "__main__":
    sys.exit(main())
