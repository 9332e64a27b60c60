#!/usr/bin/env python3
"""Single-event-upset study: one-bit flips of the knee angle reading.

Flips a random bit once per run, grouped by bit region (mantissa, exponent,
sign), and reports the classification counts per region as JSON. Runs that
produce non-finite values (possible when exponent bits flip) are counted as
diverged.
"""

import argparse
import json
from pathlib import Path

from faultbench import experiments as ex
from faultbench.scenario import data_path, load_scenario

REGIONS = {
    "mantissa": range(0, 52),
    "exponent": range(52, 63),
    "sign": [63],
}


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--joint", default="right_knee")
    ap.add_argument("--out", type=Path, default=Path("results/bitflips.json"))
    args = ap.parse_args()

    cfg = load_scenario(data_path("case_study.json"))
    report = {}
    for region, bits in REGIONS.items():
        outcomes = ex.run_bitflip_study(cfg, args.joint, bits=bits,
                                        n_seeds=args.seeds, base_seed=42)
        counts = {"Nominal": 0, "Error": 0, "Failure": 0, "diverged": 0}
        for o in outcomes:
            if o.diverged:
                counts["diverged"] += 1
            else:
                counts[o.classification.value] += 1
        report[region] = counts
        print(f"{region:9s} ({args.seeds} runs): {counts}")

    small = ex.run_small_fault_probes(cfg, args.joint, n_seeds=args.seeds, base_seed=43)
    for kind, outcomes in small.items():
        counts = {"Nominal": 0, "Error": 0, "Failure": 0, "diverged": 0}
        for o in outcomes:
            if o.diverged:
                counts["diverged"] += 1
            else:
                counts[o.classification.value] += 1
        report[kind] = counts
        print(f"{kind:9s} ({args.seeds} runs): {counts}")

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"report written to {args.out}")


if __name__ == "__main__":
    main()
