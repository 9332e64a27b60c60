"""Dynamic Movement Primitives: per-joint point attractors with a learned
forcing term, synchronized by one shared canonical phase system.

Each joint runs the transformation system

    tau * dz/dt = alpha_z * (beta_z * (g - y) - z) + f(s)
    dy/dt       = z / tau

which for f = 0 and beta_z = alpha_z / 4 is a critically damped attractor
with unique fixed point (z, y) = (0, g). The forcing term is a normalized
radial-basis mix gated by s * (g - y0), so it vanishes as the phase decays
and goal convergence is preserved for any learned weights.

The canonical phase obeys ds/dt = -alpha_s * s / tau and is stepped with its
exact solution, not Euler.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

DEFAULT_ALPHA_Z = 25.0
DEFAULT_ALPHA_S = 4.6  # phase reaches 1% of its initial value at t = tau
DEFAULT_N_BASIS = 50


class DegenerateDemo(UserWarning):
    """Demonstration has no displacement; forcing weights are set to zero."""


@dataclass(frozen=True)
class DmpParams:
    """Constants of one joint primitive. ``beta_z`` must equal ``alpha_z / 4``."""

    alpha_z: float
    beta_z: float
    tau: float
    g: float
    alpha_s: float
    centers: np.ndarray  # basis centers in phase space, decreasing from ~1
    widths: np.ndarray
    weights: np.ndarray
    y0: float = 0.0  # start position, gates the forcing amplitude
    z0: float = 0.0  # start scaled velocity (tau * dy/dt at t=0)


@dataclass(frozen=True)
class DmpState:
    y: float
    z: float


@dataclass(frozen=True)
class CanonicalSystem:
    s: float
    alpha_s: float
    tau: float


WIDTH_FACTOR = 2.5  # kernel sharpness relative to neighbour spacing


def make_basis(n_basis: int, alpha_s: float) -> tuple[np.ndarray, np.ndarray]:
    """Centers spaced evenly in time (exponentially in phase), with widths
    tied to the local spacing so every region of the phase is covered."""
    if n_basis < 1:
        raise ValueError("need at least one basis function")
    if n_basis == 1:
        return np.array([math.exp(-alpha_s / 2)]), np.array([1.0])
    times = np.linspace(0.0, 1.0, n_basis)
    centers = np.exp(-alpha_s * times)
    gaps = np.diff(centers)
    widths = WIDTH_FACTOR / gaps**2
    widths = np.append(widths, widths[-1])
    return centers, widths


def make_params(*, tau: float, g: float, y0: float = 0.0, z0: float = 0.0,
                alpha_z: float = DEFAULT_ALPHA_Z, alpha_s: float = DEFAULT_ALPHA_S,
                n_basis: int = DEFAULT_N_BASIS,
                weights: np.ndarray | None = None) -> DmpParams:
    centers, widths = make_basis(n_basis, alpha_s)
    if weights is None:
        weights = np.zeros(n_basis)
    return DmpParams(alpha_z=alpha_z, beta_z=alpha_z / 4.0, tau=tau, g=g,
                     alpha_s=alpha_s, centers=centers, widths=widths,
                     weights=np.asarray(weights, dtype=float), y0=y0, z0=z0)


def forcing(params: DmpParams, s: float) -> float:
    psi = np.exp(-params.widths * (s - params.centers) ** 2)
    denom = float(psi.sum())
    if denom < 1e-300:
        return 0.0
    return float(psi @ params.weights) / denom * s * (params.g - params.y0)


def dmp_step(params: DmpParams, state: DmpState, s: float,
             dt: float) -> tuple[DmpState, float, float, float]:
    """Advance one joint by explicit Euler; returns (state', y, dy, ddy).

    The returned targets are the values at the current step, before the
    Euler update.
    """
    f = forcing(params, s)
    zdot = (params.alpha_z * (params.beta_z * (params.g - state.y) - state.z) + f) / params.tau
    ydot = state.z / params.tau
    new_state = DmpState(y=state.y + ydot * dt, z=state.z + zdot * dt)
    return new_state, state.y, ydot, zdot / params.tau


def canonical_step(cs: CanonicalSystem, dt: float) -> float:
    """Exact decay of the linear phase system over one step."""
    return cs.s * math.exp(-cs.alpha_s * dt / cs.tau)


def learn_weights(times: np.ndarray, positions: np.ndarray,
                  params: DmpParams) -> DmpParams:
    """Fit forcing weights to a demonstrated trajectory by locally weighted
    least squares; returns params with weights, goal, and start state set.

    The demonstration must be uniformly sampled with at least 3 samples.
    Replaying the returned primitive from (y0, z0) at the demonstration's
    time scale reproduces the demonstration.
    """
    times = np.asarray(times, dtype=float)
    positions = np.asarray(positions, dtype=float)
    if times.ndim != 1 or times.shape != positions.shape or len(times) < 3:
        raise ValueError("demonstration needs >= 3 (t, y) samples")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-12) or steps[0] <= 0:
        raise ValueError("demonstration must be uniformly sampled in time")
    dt = float(steps[0])

    tau = float(times[-1] - times[0])
    g = float(positions[-1])
    y0 = float(positions[0])
    vel = np.gradient(positions, dt)
    acc = np.gradient(vel, dt)
    z0 = tau * float(vel[0])
    params = replace(params, tau=tau, g=g, y0=y0, z0=z0)

    amplitude = float(np.max(positions) - np.min(positions))
    if amplitude < 1e-12 and abs(g - y0) < 1e-12:
        warnings.warn("constant demonstration with g == y0; weights set to zero",
                      DegenerateDemo)
        return replace(params, weights=np.zeros_like(params.weights))

    # target forcing from the inverse transformation system
    f_target = tau**2 * acc - params.alpha_z * (params.beta_z * (g - positions) - tau * vel)
    s = np.exp(-params.alpha_s * (times - times[0]) / tau)
    gate = s * (g - y0)

    psi = np.exp(-params.widths[:, None] * (s[None, :] - params.centers[:, None]) ** 2)
    num = psi @ (gate * f_target)
    den = psi @ (gate * gate)
    weights = np.divide(num, den, out=np.zeros_like(num), where=np.abs(den) > 1e-300)
    return replace(params, weights=weights)


def replay(params: DmpParams, times: np.ndarray) -> np.ndarray:
    """Integrate the primitive at the given uniform time grid; returns y(t)."""
    dt = float(times[1] - times[0])
    state = DmpState(y=params.y0, z=params.z0)
    cs = CanonicalSystem(s=1.0, alpha_s=params.alpha_s, tau=params.tau)
    out = np.empty(len(times))
    s = cs.s
    for i in range(len(times)):
        state, y, _, _ = dmp_step(params, state, s, dt)
        out[i] = y
        s = canonical_step(CanonicalSystem(s=s, alpha_s=params.alpha_s, tau=params.tau), dt)
    return out


class DmpSystemBlock:
    """All joint primitives of one system, driven by a single shared phase.

    Emits per-joint position/velocity/acceleration targets as state outputs
    (they depend only on internal state), so downstream blocks can consume
    them in the same step.
    """

    def __init__(self, name: str, joint_names: list[str], params: list[DmpParams]):
        if len(joint_names) != len(params):
            raise ValueError("one parameter set per joint required")
        taus = {p.tau for p in params}
        alphas = {p.alpha_s for p in params}
        if len(taus) != 1 or len(alphas) != 1:
            raise ValueError("all joints of one system must share tau and alpha_s")
        self.name = name
        self.joint_names = list(joint_names)
        self.params = list(params)
        self.inputs: tuple[str, ...] = ()
        self.emit_output_names: tuple[str, ...] = ()
        self.feedthrough_inputs: tuple[str, ...] = ()
        self.state_output_names = tuple(
            f"dmp.{j}.{field}" for j in joint_names for field in ("pos", "vel", "acc")
        )
        self.output_names = self.state_output_names
        self.reset()

    def reset(self) -> None:
        self.states = [DmpState(y=p.y0, z=p.z0) for p in self.params]
        self.s = 1.0
        self._derivs: list[tuple[float, float]] = []

    def state_outputs(self, t: float) -> dict[str, float]:
        out: dict[str, float] = {}
        self._derivs = []
        for joint, p, st in zip(self.joint_names, self.params, self.states):
            _, y, yd, ydd = dmp_step(p, st, self.s, 0.0)
            self._derivs.append((yd, ydd * p.tau))  # (dy/dt, dz/dt)
            out[f"dmp.{joint}.pos"] = y
            out[f"dmp.{joint}.vel"] = yd
            out[f"dmp.{joint}.acc"] = ydd
        return out

    def emit(self, t: float, signals: dict[str, float], rng) -> dict[str, float]:
        return {}

    def advance(self, t: float, signals: dict[str, float], dt: float) -> None:
        self.states = [
            DmpState(y=st.y + yd * dt, z=st.z + zd * dt)
            for st, (yd, zd) in zip(self.states, self._derivs)
        ]
        p = self.params[0]
        self.s = canonical_step(CanonicalSystem(s=self.s, alpha_s=p.alpha_s, tau=p.tau), dt)
