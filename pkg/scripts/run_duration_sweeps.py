#!/usr/bin/env python3
"""Both fault-duration sweeps (fine 0.05..0.5 s, coarse 0.5..3.0 s).

Each sweep varies the exposure window of the chained right-knee injectors
and writes sweep_results.csv, sweep_summary.json, and rmse_plot.svg per
sweep under results/sweeps/.
"""

import argparse
import os
from pathlib import Path

from faultbench import cli
from faultbench.scenario import data_path


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--jobs", type=int,
                    default=int(os.environ.get("FAULTBENCH_JOBS", os.cpu_count() or 1)))
    ap.add_argument("--out", type=Path, default=Path("results/sweeps"))
    args = ap.parse_args()

    scenario = str(data_path("case_study.json"))
    for preset in ("fine", "coarse"):
        out = args.out / preset
        print(f"== {preset} sweep -> {out}")
        code = cli.main(["sweep", scenario, "--preset", preset,
                         "--seeds", str(args.seeds), "--jobs", str(args.jobs),
                         "--out", str(out)])
        if code != 0:
            raise SystemExit(code)


if __name__ == "__main__":
    main()
