"""First-maximum inter-satellite distance versus mean elevation for several receive apertures."""
import argparse
import math
from pathlib import Path

import numpy as np

from swarmlink.cli import ResultTable
from swarmlink.geometry import OrbitConfig, RxArraySpec, optimal_inter_satellite_distance

ROOT = Path(__file__).resolve().parent.parent


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", type=Path, default=ROOT / "results")
    p.add_argument("--altitude-km", type=float, default=600.0)
    p.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64, 100, 200])
    p.add_argument("--nu-d", type=float, default=1.0, help="receive spacing nu*D in units of pi")
    args = p.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    orbit = OrbitConfig(args.altitude_km * 1e3)
    elevations = np.arange(30.0, 90.01, 1.0)
    table = ResultTable(["mean_elevation"] + [f"dsopt_n{n}" for n in args.sizes],
                        ["deg"] + ["m"] * len(args.sizes))
    for el in elevations:
        row = [el]
        for n in args.sizes:
            rx = RxArraySpec(n, args.nu_d * math.pi, 1.0)
            row.append(optimal_inter_satellite_distance(math.radians(el), orbit, rx))
        table.add(row)
    out = args.out_dir / "optimal_spacing.csv"
    out.write_text(table.to_csv())
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
