"""Per-signal fault injector: fault types, activation events, exposure effects.

An injector sits inline on one scalar signal. While armed it passes the
signal through unchanged and watches its activation event; once active it
corrupts the signal according to its fault type, for an exposure window drawn
from its effect model, then re-arms (repeatable effects) or expires. A
boolean trigger output mirrors the active phase so injectors can be chained:
a true trigger input forces activation of a downstream armed injector in the
same step, regardless of the downstream event model.
"""

from __future__ import annotations

import enum
import math
import struct
from collections import deque
from dataclasses import dataclass

from .blocks import Block

# --------------------------------------------------------------------------
# fault types


@dataclass(frozen=True)
class StuckAt:
    """Hold the last value seen before activation."""


@dataclass(frozen=True)
class PackageDrop:
    """Replace the signal with a fixed value (lost-sample semantics)."""

    replacement: float


@dataclass(frozen=True)
class Bias:
    """Add a constant offset to the signal."""

    offset: float


@dataclass(frozen=True)
class Noise:
    """Add uniform noise bounded by a percentage of the correct value."""

    boundary_pct: float


@dataclass(frozen=True)
class TimeDelay:
    """Hold the pre-activation value for ``delay`` seconds, then replay the
    input delayed by ``delay`` while the fault remains active.

    ``delay`` must be a positive multiple of the simulation step.
    """

    delay: float


@dataclass(frozen=True)
class BitFlip:
    """Invert bits of the IEEE-754 binary64 representation of the value.

    Bit 0 is the least-significant mantissa bit, bit 63 the sign bit.
    With ``bit_positions == "random"``, ``n_bits`` distinct positions are
    drawn per activation and held fixed for that exposure window.
    """

    n_bits: int
    bit_positions: tuple[int, ...] | str = "random"


FaultType = StuckAt | PackageDrop | Bias | Noise | TimeDelay | BitFlip


# --------------------------------------------------------------------------
# fault events (when a fault activates)


@dataclass(frozen=True)
class FailureProbability:
    """Constant activation probability per armed execution of the block."""

    p: float


@dataclass(frozen=True)
class MeanTimeToFailure:
    """Activation scheduled Normal(mttf, sigma^2) seconds after (re-)arming."""

    mttf: float
    sigma: float = 0.0


FaultEvent = FailureProbability | MeanTimeToFailure


# --------------------------------------------------------------------------
# fault effects (how long the erroneous output lasts)


@dataclass(frozen=True)
class Once:
    """Exactly one erroneous sample; the injector never re-arms."""


@dataclass(frozen=True)
class ConstantTime:
    """Erroneous output for a fixed time window."""

    duration: float


@dataclass(frozen=True)
class InfiniteTime:
    """Erroneous output until the end of the run."""


@dataclass(frozen=True)
class MeanTimeToRepair:
    """Window length drawn Normal(mttr, sigma^2) per activation."""

    mttr: float
    sigma: float = 0.0


FaultEffect = Once | ConstantTime | InfiniteTime | MeanTimeToRepair


@dataclass(frozen=True)
class FaultSpec:
    """Full configuration of one injector instance."""

    name: str
    target_signal: str
    fault_type: FaultType
    event: FaultEvent
    effect: FaultEffect
    enabled: bool = True
    chain_to: str | None = None


class Phase(enum.Enum):
    ARMED = "armed"
    ACTIVE = "active"
    EXPIRED = "expired"


# --------------------------------------------------------------------------
# stochastic draws


def sample_activation_time(event: MeanTimeToFailure, t_now: float, rng, dt: float) -> float:
    """Next activation time for a mean-time-to-failure event.

    The normal draw is truncated below at one step so an activation can
    never be scheduled at or before the arming step.
    """
    x = rng.normal(event.mttf, event.sigma) if event.sigma > 0.0 else event.mttf
    return t_now + max(dt, x)


def sample_exposure(effect: FaultEffect, rng, dt: float) -> float:
    """Exposure window in seconds. ``math.inf`` means until the end of the run.

    ``Once`` maps to a single step (``dt``); normal draws are truncated below
    at one step.
    """
    if isinstance(effect, Once):
        return dt
    if isinstance(effect, ConstantTime):
        return effect.duration
    if isinstance(effect, InfiniteTime):
        return math.inf
    if isinstance(effect, MeanTimeToRepair):
        x = rng.normal(effect.mttr, effect.sigma) if effect.sigma > 0.0 else effect.mttr
        return max(dt, x)
    raise TypeError(f"unknown fault effect: {effect!r}")


def flip_bits(value: float, mask: int) -> float:
    """XOR ``mask`` into the binary64 representation of ``value``.

    Involutive: applying the same mask twice restores the original bit
    pattern exactly. The result may be non-finite when exponent bits flip.
    """
    (bits,) = struct.unpack("<Q", struct.pack("<d", value))
    return struct.unpack("<d", struct.pack("<Q", bits ^ mask))[0]


def mask_from_positions(positions) -> int:
    mask = 0
    for pos in positions:
        mask |= 1 << int(pos)
    return mask


# --------------------------------------------------------------------------
# the injector block


class Injector(Block):
    """Stateful fault injector on one scalar signal, with trigger chaining.

    ``trigger_sources`` are the trigger-output signal names of upstream
    injectors chained into this one; any of them being true forces
    activation while armed.
    """

    def __init__(self, spec: FaultSpec, dt: float, in_signal: str,
                 trigger_sources: tuple[str, ...] = ()):
        self.spec = spec
        self.dt = dt
        self.name = f"inj.{spec.name}"
        self.enabled = spec.enabled
        self.in_signal = in_signal
        self.trigger_sources = tuple(trigger_sources)
        self.out_signal = f"inj.{spec.name}.out"
        self.trigger_signal = f"inj.{spec.name}.trigger"
        self.inputs = (in_signal,) + self.trigger_sources
        self.emit_output_names = (self.out_signal, self.trigger_signal)
        ft = spec.fault_type
        self._delay_steps = round(ft.delay / dt) if isinstance(ft, TimeDelay) else 0
        if isinstance(ft, BitFlip) and ft.bit_positions != "random":
            self._fixed_mask = mask_from_positions(ft.bit_positions)
        else:
            self._fixed_mask = None
        self.reset()

    def reset(self) -> None:
        self._phase = Phase.ARMED
        self._held = 0.0
        self._step_idx = 0
        self._act_step = -1
        self._steps_left: int | None = 0
        self._scheduled_t: float | None = None
        self._mask = self._fixed_mask or 0
        self._dbuf: deque[float] | None = (
            deque(maxlen=self._delay_steps) if self._delay_steps > 0 else None
        )

    # -- state machine ------------------------------------------------------

    def step(self, x: float, t: float, trigger_in: bool, rng) -> tuple[float, bool]:
        """Process one sample; returns (output, trigger_out)."""
        k = self._step_idx
        self._step_idx = k + 1
        if k == 0:
            self._held = x

        if not self.enabled:
            self._record_input(x)
            return x, False

        if self._phase is Phase.ARMED:
            if trigger_in or self._event_fires(t, rng):
                self._activate(k, rng)
            if self._phase is Phase.ARMED:  # not activated, or zero-length window
                self._held = x
                self._record_input(x)
                return x, False

        if self._phase is Phase.ACTIVE:
            y = self._apply(x, k, rng)
            self._record_input(x)
            if self._steps_left is not None:
                self._steps_left -= 1
                if self._steps_left == 0:
                    self._deactivate()
            return y, True

        self._record_input(x)
        return x, False

    def _event_fires(self, t: float, rng) -> bool:
        ev = self.spec.event
        if isinstance(ev, FailureProbability):
            return rng.random() < ev.p
        if self._scheduled_t is None:
            self._scheduled_t = sample_activation_time(ev, t, rng, self.dt)
        return t >= self._scheduled_t - 1e-9 * self.dt

    def _activate(self, k: int, rng) -> None:
        window_s = sample_exposure(self.spec.effect, rng, self.dt)
        steps = None if math.isinf(window_s) else round(window_s / self.dt)
        if steps == 0:
            return  # degenerate empty window: stay armed
        self._phase = Phase.ACTIVE
        self._act_step = k
        self._steps_left = steps
        ft = self.spec.fault_type
        if isinstance(ft, BitFlip) and self._fixed_mask is None:
            positions = rng.choice(64, size=ft.n_bits, replace=False)
            self._mask = mask_from_positions(positions)

    def _deactivate(self) -> None:
        if isinstance(self.spec.effect, Once):
            self._phase = Phase.EXPIRED
        else:
            self._phase = Phase.ARMED
            self._scheduled_t = None  # re-sample activation time on next armed step

    def _apply(self, x: float, k: int, rng) -> float:
        ft = self.spec.fault_type
        if isinstance(ft, StuckAt):
            return self._held
        if isinstance(ft, PackageDrop):
            return ft.replacement
        if isinstance(ft, Bias):
            return x + ft.offset
        if isinstance(ft, Noise):
            bound = abs(x) * ft.boundary_pct / 100.0
            return x + rng.uniform(-bound, bound)
        if isinstance(ft, TimeDelay):
            if k - self._act_step < self._delay_steps:
                return self._held
            return self._dbuf[0]  # input from delay_steps ago; buffer is full here
        if isinstance(ft, BitFlip):
            return flip_bits(x, self._mask)
        raise TypeError(f"unknown fault type: {ft!r}")

    def _record_input(self, x: float) -> None:
        if self._dbuf is not None:
            self._dbuf.append(x)

    # -- block protocol -------------------------------------------------------

    def emit(self, t: float, signals: dict[str, float], rng) -> dict[str, float]:
        trigger_in = any(signals[s] >= 0.5 for s in self.trigger_sources)
        y, trig = self.step(float(signals[self.in_signal]), t, trigger_in, rng)
        return {self.out_signal: y, self.trigger_signal: 1.0 if trig else 0.0}
