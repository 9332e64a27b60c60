"""Six-joint lower-limb exoskeleton surrogate.

Each joint is an independent second-order rotational plant
I * d(omega)/dt = tau - b * omega, driven by a computed-torque + PD
controller that turns trajectory targets into torque demands. Sensor taps
(true angle and angular velocity) are where fault injectors attach; the
controller reads the possibly-faulted versions.

A constraint monitor checks every step against the straight-walking safety
limits: exceeding a torque or speed rating is an Error, leaving the joint's
range of travel is a Failure. Violations are recorded, never clamped; the
only physical limit enforced is actuator torque saturation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .blocks import Block

DEG = math.pi / 180.0

# Per-kind safety limits for straight walking: torque rating [N*m],
# speed rating [rpm], range of travel [deg]. Torque/speed breaches are
# classified Error, range-of-travel breaches Failure.
JOINT_KIND_LIMITS = {
    "hip": {"max_torque_nm": 72.9, "max_speed_rpm": 23.4, "rot_min_deg": -30.0, "rot_max_deg": 90.0},
    "knee": {"max_torque_nm": 54.9, "max_speed_rpm": 65.2, "rot_min_deg": -90.0, "rot_max_deg": 0.0},
    "ankle": {"max_torque_nm": 128.7, "max_speed_rpm": 50.8, "rot_min_deg": -30.0, "rot_max_deg": 30.0},
}

# surrogate dynamics defaults, tuned so the fault-free system tracks its
# targets well within tolerance; not physical identifications
JOINT_KIND_INERTIA = {"hip": 1.2, "knee": 0.8, "ankle": 0.4}
DEFAULT_DAMPING = 0.5

JOINT_NAMES = ("left_hip", "left_knee", "left_ankle", "right_hip", "right_knee", "right_ankle")


def joint_kind(name: str) -> str:
    kind = name.rsplit("_", 1)[-1]
    if kind not in JOINT_KIND_LIMITS:
        raise ValueError(f"joint name {name!r} must end in hip, knee, or ankle")
    return kind


@dataclass(frozen=True)
class JointParams:
    """Per-joint plant constants and safety limits (angles in rad)."""

    name: str
    inertia: float
    damping: float
    rot_min: float
    rot_max: float
    max_torque: float
    max_speed_rpm: float


@dataclass(frozen=True)
class JointState:
    theta: float
    omega: float
    tau_applied: float = 0.0


class ViolationKind(enum.Enum):
    TORQUE_ERROR = "TorqueError"
    SPEED_ERROR = "SpeedError"
    ANGLE_FAILURE = "AngleFailure"


@dataclass(frozen=True)
class ViolationRecord:
    t: float
    joint: str
    kind: ViolationKind
    value: float


def default_joint_params(name: str, **overrides) -> JointParams:
    kind = joint_kind(name)
    limits = JOINT_KIND_LIMITS[kind]
    fields = {
        "inertia": JOINT_KIND_INERTIA[kind],
        "damping": DEFAULT_DAMPING,
        "rot_min": limits["rot_min_deg"] * DEG,
        "rot_max": limits["rot_max_deg"] * DEG,
        "max_torque": limits["max_torque_nm"],
        "max_speed_rpm": limits["max_speed_rpm"],
    }
    fields.update(overrides)
    return JointParams(name=name, **fields)


# --------------------------------------------------------------------------
# unit conversions and power


def rpm_to_rad_s(rpm: float) -> float:
    return rpm * math.tau / 60.0


def rad_s_to_rpm(rad_s: float) -> float:
    return rad_s * 60.0 / math.tau


def joint_power(torque_nm: float, speed_rpm: float) -> float:
    """Mechanical power at a joint [W] from torque [N*m] and speed [rpm]."""
    return torque_nm * rpm_to_rad_s(speed_rpm)


# --------------------------------------------------------------------------
# control and dynamics


def dynamic_control(y_target: float, yd_target: float, ydd_target: float,
                    theta_meas: float, omega_meas: float,
                    inertia: float, kp: float, kd: float,
                    max_torque: float) -> tuple[float, float]:
    """Computed-torque + PD law; returns (tau_cmd, tau_demand).

    ``tau_demand`` is the raw control demand, ``tau_cmd`` the value after
    saturation to the actuator rating. The measured values are whatever the
    sensor path delivers, faulted or not.
    """
    demand = inertia * ydd_target + kp * (y_target - theta_meas) + kd * (yd_target - omega_meas)
    return max(-max_torque, min(max_torque, demand)), demand


def joint_step(params: JointParams, state: JointState, tau: float, dt: float) -> JointState:
    """Semi-implicit Euler step of I * d(omega)/dt = tau - b * omega."""
    alpha = (tau - params.damping * state.omega) / params.inertia
    omega = state.omega + alpha * dt
    theta = state.theta + omega * dt
    return JointState(theta=theta, omega=omega, tau_applied=tau)


def monitor(joints: list[JointParams], thetas, omegas, tau_demands,
            t: float) -> list[ViolationRecord]:
    """Check one step against the safety limits.

    ``tau_demands`` are the unsaturated torque demands: the applied torque is
    clipped to the rating by construction, so the demand is the observable
    that can exceed it.
    """
    records = []
    for p, theta, omega, tau in zip(joints, thetas, omegas, tau_demands):
        if abs(tau) > p.max_torque:
            records.append(ViolationRecord(t, p.name, ViolationKind.TORQUE_ERROR, tau))
        if abs(omega) > rpm_to_rad_s(p.max_speed_rpm):
            records.append(ViolationRecord(t, p.name, ViolationKind.SPEED_ERROR, omega))
        if theta < p.rot_min or theta > p.rot_max:
            records.append(ViolationRecord(t, p.name, ViolationKind.ANGLE_FAILURE, theta))
    return records


# --------------------------------------------------------------------------
# engine blocks


class PlantBlock(Block):
    """Joint dynamics plus the torque controller for all joints.

    True angle/velocity are state outputs (sensor taps, one-step causal);
    torques are emitted feedthrough from the current targets and
    measurements. ``measured_pos``/``measured_vel`` name the signals the
    controller reads, which the graph builder points at the end of any
    injector chain.
    """

    def __init__(self, name: str, joints: list[JointParams], kp: float, kd: float,
                 theta0: list[float], target_prefix: str = "dmp"):
        self.name = name
        self.joints = list(joints)
        self.kp = kp
        self.kd = kd
        self.theta0 = list(theta0)
        jn = [p.name for p in joints]
        self.target_signals = [(f"{target_prefix}.{j}.pos", f"{target_prefix}.{j}.vel",
                                f"{target_prefix}.{j}.acc") for j in jn]
        self.measured_pos = [f"plant.{j}.pos" for j in jn]
        self.measured_vel = [f"plant.{j}.vel" for j in jn]
        self.state_output_names = tuple(
            f"plant.{j}.{field}" for j in jn for field in ("pos", "vel")
        )
        self.emit_output_names = tuple(
            f"plant.{j}.{field}" for j in jn for field in ("torque", "torque_cmd")
        )
        self.torque_signals = [f"plant.{j}.torque" for j in jn]
        self.reset()

    @property
    def inputs(self) -> tuple[str, ...]:
        names = []
        for triple in self.target_signals:
            names.extend(triple)
        names.extend(self.measured_pos)
        names.extend(self.measured_vel)
        return tuple(names)

    def reset(self) -> None:
        self.states = [JointState(theta=th0, omega=0.0) for th0 in self.theta0]

    def state_outputs(self, t: float) -> dict[str, float]:
        out = {}
        for p, st in zip(self.joints, self.states):
            out[f"plant.{p.name}.pos"] = st.theta
            out[f"plant.{p.name}.vel"] = st.omega
        return out

    def emit(self, t: float, signals: dict[str, float], rng) -> dict[str, float]:
        out = {}
        for i, p in enumerate(self.joints):
            pos_sig, vel_sig, acc_sig = self.target_signals[i]
            tau_cmd, demand = dynamic_control(
                signals[pos_sig], signals[vel_sig], signals[acc_sig],
                signals[self.measured_pos[i]], signals[self.measured_vel[i]],
                p.inertia, self.kp, self.kd, p.max_torque,
            )
            out[f"plant.{p.name}.torque"] = tau_cmd
            out[f"plant.{p.name}.torque_cmd"] = demand
        return out

    def advance(self, t: float, signals: dict[str, float], dt: float) -> None:
        self.states = [
            joint_step(p, st, signals[sig], dt)
            for p, st, sig in zip(self.joints, self.states, self.torque_signals)
        ]


class MonitorBlock(Block):
    """Safety monitor over the true joint states and torque demands.

    Always reads the raw plant outputs: a fault on a sensor path changes
    what the controller sees, not what physically happened, and the safety
    verdict is about the physical state.
    """

    def __init__(self, name: str, joints: list[JointParams]):
        self.name = name
        self.joints = list(joints)
        jn = [p.name for p in joints]
        self.pos_signals = [f"plant.{j}.pos" for j in jn]
        self.vel_signals = [f"plant.{j}.vel" for j in jn]
        self.demand_signals = [f"plant.{j}.torque_cmd" for j in jn]
        self.inputs = tuple(self.pos_signals + self.vel_signals + self.demand_signals)
        self.emit_output_names = ("monitor.violations",)
        self.reset()

    def reset(self) -> None:
        self.violations: list[ViolationRecord] = []

    def emit(self, t: float, signals: dict[str, float], rng) -> dict[str, float]:
        records = monitor(
            self.joints,
            [signals[s] for s in self.pos_signals],
            [signals[s] for s in self.vel_signals],
            [signals[s] for s in self.demand_signals],
            t,
        )
        self.violations.extend(records)
        return {"monitor.violations": float(len(records))}
