"""Deterministic fixed-step executor for a graph of signal-processing blocks.

Signals are named scalars; trigger lines are booleans carried as 0/1. Each
step proceeds in three phases:

1. every block publishes its state outputs (values derivable from internal
   state alone, hence from inputs of previous steps),
2. blocks emit their feedthrough outputs in topological order over the
   instantaneous-feedthrough subgraph,
3. every block advances its state from the completed signal set.

Randomness comes from one PCG64 substream per block, derived from the run
seed and the block name, so traces are bit-identical for a fixed
(graph, clock, seed) and unaffected by the declaration order of unrelated
blocks.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass

import numpy as np

from . import dmp as dmp_mod
from . import faults as faults_mod
from . import plant as plant_mod
from .scenario import ScenarioConfig, load_demo_csv


class WiringError(Exception):
    """A consumed signal has no producer, or a signal has two producers."""


class AlgebraicLoop(Exception):
    """Cycle among instantaneous-feedthrough ports."""

    def __init__(self, cycle: list[str]):
        super().__init__("algebraic loop among feedthrough blocks: " + " -> ".join(cycle))
        self.cycle = cycle

    def __reduce__(self):  # survives process-pool boundaries
        return (AlgebraicLoop, (self.cycle,))


class NumericalDivergence(Exception):
    """A block produced a non-finite signal value."""

    def __init__(self, t: float, block: str, signal: str, value: float,
                 cell: tuple | None = None):
        where = f" in sweep cell (duration={cell[0]}, seed={cell[1]})" if cell else ""
        super().__init__(f"non-finite value {value!r} on {signal!r} from block "
                         f"{block!r} at t={t:.6f}s{where}")
        self.t = t
        self.block = block
        self.signal = signal
        self.value = value
        self.cell = cell

    def __reduce__(self):  # survives process-pool boundaries
        return (NumericalDivergence, (self.t, self.block, self.signal, self.value,
                                      self.cell))


@dataclass(frozen=True)
class SimClock:
    dt: float
    t_end: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")

    @property
    def n_steps(self) -> int:
        return round(self.t_end / self.dt)


@dataclass(frozen=True)
class TraceLog:
    """Immutable per-step record of monitored signals."""

    columns: tuple[str, ...]
    t: np.ndarray
    data: np.ndarray  # shape (n_steps, len(columns))

    def signal(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def __len__(self) -> int:
        return len(self.t)

    def to_csv(self, path_or_file) -> None:
        close = False
        if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
            fh = open(path_or_file, "w", newline="")
            close = True
        else:
            fh = path_or_file
        try:
            fh.write("t," + ",".join(self.columns) + "\n")
            for i in range(len(self.t)):
                row = self.data[i]
                fh.write(f"{self.t[i]:.9g}," + ",".join(f"{v:.9g}" for v in row) + "\n")
        finally:
            if close:
                fh.close()

    def to_csv_str(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path_or_file) -> "TraceLog":
        close = False
        if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
            fh = open(path_or_file, "r", newline="")
            close = True
        else:
            fh = path_or_file
        try:
            header = fh.readline().strip()
            names = header.split(",")
            if not names or names[0] != "t":
                raise ValueError("trace CSV must start with a 't' column")
            rows = [line.strip().split(",") for line in fh if line.strip()]
        finally:
            if close:
                fh.close()
        if rows:
            arr = np.array([[float(v) for v in row] for row in rows])
            t, data = arr[:, 0], arr[:, 1:]
        else:
            t = np.empty(0)
            data = np.empty((0, len(names) - 1))
        return cls(columns=tuple(names[1:]), t=t, data=data)


class BlockGraph:
    """Validated, ordered set of blocks with a shared signal namespace."""

    def __init__(self, blocks: list, monitored: tuple[str, ...] | None = None):
        self.blocks = list(blocks)
        names = [b.name for b in self.blocks]
        if len(set(names)) != len(names):
            raise WiringError("block names must be unique")

        producers: dict[str, str] = {}
        for b in self.blocks:
            for sig in b.output_names:
                if sig in producers:
                    raise WiringError(f"signal {sig!r} produced by both "
                                      f"{producers[sig]!r} and {b.name!r}")
                producers[sig] = b.name
        for b in self.blocks:
            for sig in b.inputs:
                if sig not in producers:
                    raise WiringError(f"block {b.name!r} reads unknown signal {sig!r}")
        self.producers = producers

        all_signals = [sig for b in self.blocks for sig in b.output_names]
        if monitored is None:
            self.monitored = tuple(all_signals)
        else:
            for sig in monitored:
                if sig not in producers:
                    raise WiringError(f"monitored signal {sig!r} is not produced")
            self.monitored = tuple(monitored)

        self.emit_order = self._sort_feedthrough()

    def _sort_feedthrough(self) -> list:
        emitters = [b for b in self.blocks if b.emit_output_names]
        emitted_by = {sig: b.name for b in emitters for sig in b.emit_output_names}
        index = {b.name: i for i, b in enumerate(self.blocks)}
        deps: dict[str, set[str]] = {b.name: set() for b in emitters}
        rdeps: dict[str, set[str]] = {b.name: set() for b in emitters}
        for b in emitters:
            for sig in b.feedthrough_inputs:
                src = emitted_by.get(sig)
                if src is not None and src != b.name:
                    deps[b.name].add(src)
                    rdeps[src].add(b.name)

        order = []
        remaining = {b.name: set(d) for b, d in ((b, deps[b.name]) for b in emitters)}
        by_name = {b.name: b for b in emitters}
        ready = sorted((n for n, d in remaining.items() if not d), key=index.__getitem__)
        while ready:
            name = ready.pop(0)
            order.append(by_name[name])
            del remaining[name]
            newly = []
            for succ in rdeps[name]:
                if succ in remaining:
                    remaining[succ].discard(name)
                    if not remaining[succ]:
                        newly.append(succ)
            ready = sorted(ready + newly, key=index.__getitem__)
        if remaining:
            cycle = self._find_cycle(remaining, deps)
            raise AlgebraicLoop(cycle)
        return order

    @staticmethod
    def _find_cycle(remaining, deps) -> list[str]:
        start = sorted(remaining)[0]
        seen, path = set(), [start]
        node = start
        while node not in seen:
            seen.add(node)
            node = sorted(d for d in deps[node] if d in remaining)[0]
            path.append(node)
        i = path.index(node)
        return path[i:]

    def block(self, name: str):
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    @property
    def wires(self) -> list[tuple[str, str, str]]:
        """(source_block, signal, sink_block) for every connection."""
        out = []
        for b in self.blocks:
            for sig in b.inputs:
                out.append((self.producers[sig], sig, b.name))
        return out


def _block_seed(run_seed: int, block_name: str) -> np.random.SeedSequence:
    digest = hashlib.sha256(block_name.encode()).digest()
    return np.random.SeedSequence([run_seed, int.from_bytes(digest[:8], "big")])


def run(graph: BlockGraph, clock: SimClock, seed: int) -> TraceLog:
    """Execute all steps; returns the trace of monitored signals.

    Bit-identical output for identical (graph, clock, seed). Raises
    NumericalDivergence if any block produces a non-finite value.
    """
    steps = clock.n_steps
    dt = clock.dt
    columns = graph.monitored
    col_index = {name: i for i, name in enumerate(columns)}
    data = np.empty((steps, len(columns)))
    t_arr = np.arange(steps) * dt

    rngs = {b.name: np.random.Generator(np.random.PCG64(_block_seed(seed, b.name)))
            for b in graph.blocks}
    for b in graph.blocks:
        b.reset()

    blocks = graph.blocks
    emit_order = graph.emit_order
    for k in range(steps):
        t = k * dt
        signals: dict[str, float] = {}
        for b in blocks:
            out = b.state_outputs(t)
            _check_finite(out, t, b.name)
            signals.update(out)
        for b in emit_order:
            out = b.emit(t, signals, rngs[b.name])
            _check_finite(out, t, b.name)
            signals.update(out)
        row = data[k]
        for name, i in col_index.items():
            row[i] = signals[name]
        for b in blocks:
            b.advance(t, signals, dt)
    return TraceLog(columns=columns, t=t_arr, data=data)


def _check_finite(out: dict[str, float], t: float, block: str) -> None:
    for sig, v in out.items():
        if not math.isfinite(v):
            raise NumericalDivergence(t, block, sig, v)


# --------------------------------------------------------------------------
# scenario -> graph


def build_graph(cfg: ScenarioConfig) -> BlockGraph:
    """Wire trajectory generator, plant, injectors, and monitor as declared.

    Injectors targeting the same signal are chained in declaration order;
    every consumer except the monitor then reads the end of the chain. The
    monitor always reads the raw plant signals, because the safety verdict
    concerns the physical state, not the sensor view.
    """
    times, demo = load_demo_csv(cfg.demo_path)
    joint_names = list(cfg.joint_names)
    if demo.shape[1] != len(joint_names):
        raise WiringError(f"demo has {demo.shape[1]} joint columns, scenario has "
                          f"{len(joint_names)} joints")

    params = []
    for j in range(len(joint_names)):
        base = dmp_mod.make_params(tau=1.0, g=0.0, alpha_z=cfg.dmp.alpha_z,
                                   alpha_s=cfg.dmp.alpha_s, n_basis=cfg.dmp.n_basis)
        params.append(dmp_mod.learn_weights(times, demo[:, j], base))

    dmp_block = dmp_mod.DmpSystemBlock("dmp", joint_names, params)
    plant_block = plant_mod.PlantBlock(
        "plant", list(cfg.joints), cfg.control.kp, cfg.control.kd,
        theta0=[float(demo[0, j]) for j in range(len(joint_names))],
    )
    monitor_block = plant_mod.MonitorBlock("monitor", list(cfg.joints))

    # chain injectors per target signal, in declaration order
    chained_from: dict[str, list[str]] = {}
    for spec in cfg.injectors:
        if spec.chain_to is not None:
            chained_from.setdefault(spec.chain_to, []).append(spec.name)

    base_signals = {sig for b in (dmp_block, plant_block, monitor_block)
                    for sig in b.output_names}
    chain_end: dict[str, str] = {}
    injectors = []
    for spec in cfg.injectors:
        if spec.target_signal not in base_signals:
            raise WiringError(f"injector {spec.name!r} targets unknown signal "
                              f"{spec.target_signal!r}")
        upstream = chain_end.get(spec.target_signal, spec.target_signal)
        triggers = tuple(f"inj.{src}.trigger" for src in chained_from.get(spec.name, ()))
        inj = faults_mod.Injector(spec, cfg.clock.dt_s, upstream, triggers)
        chain_end[spec.target_signal] = inj.out_signal
        injectors.append(inj)

    # controller measurements read the faulted chain ends
    for i, j in enumerate(joint_names):
        plant_block.measured_pos[i] = chain_end.get(f"plant.{j}.pos", f"plant.{j}.pos")
        plant_block.measured_vel[i] = chain_end.get(f"plant.{j}.vel", f"plant.{j}.vel")

    blocks = [dmp_block, plant_block, monitor_block] + injectors
    return BlockGraph(blocks, monitored=cfg.monitors.signals)
