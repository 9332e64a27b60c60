#!/usr/bin/env python3
"""Regenerate the shipped demonstration trajectories.

Synthetic smooth gait-like profiles: a minimum-jerk posture ramp plus an
amplitude-tapered stride oscillation, per joint, all well inside the joints'
ranges of travel and speed ratings. The left and right legs run half a
stride out of phase. Every joint starts and ends at rest and ends at a
different pose than it started, so the learned primitives have a non-zero
displacement to gate their forcing term.
"""

import math
from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "faultbench" / "data"

T_END = 7.0
DT = 1e-3
STRIDE_S = 3.5  # two strides over the run

# joint kind -> (start pose [rad], end pose [rad], stride amplitude [rad])
PROFILE = {
    "hip": (0.15, 0.50, 0.25),
    "knee": (-0.80, -0.45, 0.30),
    "ankle": (-0.10, 0.10, 0.25),
}

JOINTS = ("left_hip", "left_knee", "left_ankle", "right_hip", "right_knee", "right_ankle")


def min_jerk(u: np.ndarray) -> np.ndarray:
    return 10 * u**3 - 15 * u**4 + 6 * u**5


def joint_angle(name: str, t: np.ndarray) -> np.ndarray:
    kind = name.split("_")[1]
    start, end, amp = PROFILE[kind]
    phase = math.pi if name.startswith("left") else 0.0
    ramp = start + (end - start) * min_jerk(t / T_END)
    envelope = np.sin(math.pi * t / T_END) ** 2  # rest at both ends
    stride = np.sin(2.0 * math.pi * t / STRIDE_S + phase)
    return ramp + amp * envelope * stride


def write_csv(path: Path, joints) -> None:
    t = np.arange(round(T_END / DT) + 1) * DT
    cols = [joint_angle(j, t) for j in joints]
    header = "t," + ",".join(f"joint_{i}" for i in range(len(joints)))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for k in range(len(t)):
            fh.write(f"{t[k]:.9g}," + ",".join(f"{c[k]:.9g}" for c in cols) + "\n")
    print(f"wrote {path} ({len(t)} samples, {len(joints)} joints)")


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    write_csv(DATA_DIR / "demo_gait.csv", JOINTS)
    write_csv(DATA_DIR / "demo_minimal.csv", ("right_knee",))


if __name__ == "__main__":
    main()
