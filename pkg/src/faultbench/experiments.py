"""Monte-Carlo fault-duration sweeps and fault-tolerance metrics.

For every (duration, seed) cell the harness runs the scenario twice with the
same seed: once with all injectors disabled (reference) and once enabled
(faulty). Root-mean-square error between the two physical traces of the
faulted joint (angle, angular velocity, applied torque) quantifies the fault
impact; the safety monitor of the faulty run classifies the cell as Nominal,
Error, or Failure.

Cells are independent jobs with a deterministic seed mapping, so results are
identical regardless of the parallelism degree. Seeds are shared across
durations (cell seed depends on the seed index only), which pairs the fault
activation pattern across the sweep and sharpens the duration trend.
"""

from __future__ import annotations

import enum
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import engine, faults
from .plant import ViolationKind, ViolationRecord
from .scenario import ScenarioConfig, set_faults_enabled, with_injector_durations

FINE_DURATIONS = tuple(round(0.05 * (i + 1), 10) for i in range(10))      # 0.05 .. 0.5
COARSE_DURATIONS = tuple(round(0.5 + 0.25 * i, 10) for i in range(11))    # 0.5 .. 3.0


class LengthMismatch(ValueError):
    """Traces of different lengths cannot be compared."""


class DegenerateFit(ValueError):
    """Fewer than 3 distinct x values; a quadratic is underdetermined."""


class Classification(enum.Enum):
    NOMINAL = "Nominal"
    ERROR = "Error"
    FAILURE = "Failure"


def rmse(faulty: np.ndarray, reference: np.ndarray) -> float:
    """Root-mean-square difference of two equally long traces."""
    faulty = np.asarray(faulty, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if faulty.shape != reference.shape:
        raise LengthMismatch(f"trace shapes differ: {faulty.shape} vs {reference.shape}")
    if faulty.size == 0:
        return 0.0
    return float(np.sqrt(np.mean((faulty - reference) ** 2)))


def classify_run(violations) -> Classification:
    kinds = {v.kind for v in violations}
    if ViolationKind.ANGLE_FAILURE in kinds:
        return Classification.FAILURE
    if ViolationKind.TORQUE_ERROR in kinds or ViolationKind.SPEED_ERROR in kinds:
        return Classification.ERROR
    return Classification.NOMINAL


@dataclass(frozen=True)
class QuadraticFit:
    a: float
    b: float
    c: float
    residual: float  # RMS of fit errors


def fit_quadratic(xs, ys) -> QuadraticFit:
    """Least-squares fit of a*x^2 + b*x + c."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(set(xs.tolist())) < 3:
        raise DegenerateFit("need at least 3 distinct x values")
    coeffs = np.polyfit(xs, ys, 2)
    fitted = np.polyval(coeffs, xs)
    residual = float(np.sqrt(np.mean((fitted - ys) ** 2)))
    return QuadraticFit(a=float(coeffs[0]), b=float(coeffs[1]), c=float(coeffs[2]),
                        residual=residual)


# --------------------------------------------------------------------------
# single runs


@dataclass(frozen=True)
class RunOutput:
    trace: engine.TraceLog
    violations: tuple[ViolationRecord, ...]
    classification: Classification


def simulate(cfg: ScenarioConfig, seed: int | None = None,
             faults_enabled: bool = True) -> RunOutput:
    """Build and execute one run; seed defaults to the scenario seed."""
    if not faults_enabled:
        cfg = set_faults_enabled(cfg, False)
    graph = engine.build_graph(cfg)
    clock = engine.SimClock(dt=cfg.clock.dt_s, t_end=cfg.clock.t_end_s)
    trace = engine.run(graph, clock, cfg.seed if seed is None else seed)
    violations = tuple(graph.block("monitor").violations)
    return RunOutput(trace=trace, violations=violations,
                     classification=classify_run(violations))


# --------------------------------------------------------------------------
# sweep plan and results


@dataclass(frozen=True)
class SweepPlan:
    scenario: ScenarioConfig
    durations: tuple[float, ...]
    seeds_per_duration: int = 20
    base_seed: int = 0
    varied_injectors: tuple[str, ...] | None = None  # None = all constant-time ones
    primary_injector: str | None = None  # whose trigger defines activation windows
    gap_threshold_s: float = 0.5  # below this inter-activation gap a run is "consecutive"

    def resolved_varied(self) -> tuple[str, ...]:
        if self.varied_injectors is not None:
            return self.varied_injectors
        names = tuple(s.name for s in self.scenario.injectors
                      if isinstance(s.effect, faults.ConstantTime))
        if not names:
            raise ValueError("scenario has no constant-time injector to vary")
        return names

    def resolved_primary(self) -> str:
        if self.primary_injector is not None:
            return self.primary_injector
        for s in self.scenario.injectors:
            if s.chain_to is not None:
                return s.name
        return self.resolved_varied()[0]

    def metric_joint(self) -> str:
        primary = self.resolved_primary()
        for s in self.scenario.injectors:
            if s.name == primary:
                parts = s.target_signal.split(".")
                if len(parts) == 3:
                    return parts[1]
        return self.scenario.joint_names[0]


@dataclass(frozen=True)
class CellResult:
    duration_s: float
    seed_index: int
    rmse_pos: float
    rmse_vel: float
    rmse_torque: float
    classification: Classification
    n_activations: int
    min_gap_s: float | None  # None when fewer than two activations

    def row(self) -> str:
        return (f"{self.duration_s:.9g},{self.seed_index},{self.rmse_pos:.9g},"
                f"{self.rmse_vel:.9g},{self.rmse_torque:.9g},{self.classification.value}")


@dataclass(frozen=True)
class DurationAggregate:
    duration_s: float
    mean: dict
    min: dict
    max: dict
    counts: dict
    failure_fraction: float


@dataclass(frozen=True)
class SweepResult:
    plan_durations: tuple[float, ...]
    seeds_per_duration: int
    base_seed: int
    gap_threshold_s: float
    cells: tuple[CellResult, ...]
    aggregates: tuple[DurationAggregate, ...]
    fits: dict  # metric -> QuadraticFit
    d_star_s: float | None
    bin_d_star_s: dict  # "consecutive"/"isolated" -> duration or None
    bin_counts: dict


def cell_seed(base_seed: int, seed_index: int) -> int:
    """Deterministic per-seed-slot run seed, shared across durations."""
    ss = np.random.SeedSequence([int(base_seed), int(seed_index)])
    return int(ss.generate_state(1, np.uint64)[0])


def _activation_windows(trace: engine.TraceLog, trigger_signal: str,
                        dt: float) -> tuple[int, float | None]:
    """Number of activation windows and the minimum gap between them [s]."""
    if trigger_signal not in trace.columns or len(trace) == 0:
        return 0, None
    active = trace.signal(trigger_signal) >= 0.5
    starts, ends = [], []
    prev = False
    for k, a in enumerate(active):
        if a and not prev:
            starts.append(k)
        if not a and prev:
            ends.append(k - 1)
        prev = a
    if prev:
        ends.append(len(active) - 1)
    if len(starts) < 2:
        return len(starts), None
    gaps = [(starts[i + 1] - ends[i] - 1) * dt for i in range(len(starts) - 1)]
    return len(starts), min(gaps)


def _run_cell(cfg: ScenarioConfig, varied: tuple[str, ...], primary: str,
              joint: str, duration: float, seed_index: int,
              base_seed: int) -> CellResult:
    cfg = with_injector_durations(cfg, varied, duration)
    seed = cell_seed(base_seed, seed_index)
    graph = engine.build_graph(cfg)
    clock = engine.SimClock(dt=cfg.clock.dt_s, t_end=cfg.clock.t_end_s)

    inj_blocks = [b for b in graph.blocks if isinstance(b, faults.Injector)]
    for b in inj_blocks:
        b.enabled = False
    reference = engine.run(graph, clock, seed)
    for b in inj_blocks:
        b.enabled = b.spec.enabled
    try:
        faulty = engine.run(graph, clock, seed)
    except engine.NumericalDivergence as exc:
        raise engine.NumericalDivergence(exc.t, exc.block, exc.signal, exc.value,
                                         cell=(duration, seed_index)) from None

    violations = graph.block("monitor").violations
    n_act, min_gap = _activation_windows(faulty, f"inj.{primary}.trigger", cfg.clock.dt_s)
    return CellResult(
        duration_s=duration,
        seed_index=seed_index,
        rmse_pos=rmse(faulty.signal(f"plant.{joint}.pos"), reference.signal(f"plant.{joint}.pos")),
        rmse_vel=rmse(faulty.signal(f"plant.{joint}.vel"), reference.signal(f"plant.{joint}.vel")),
        rmse_torque=rmse(faulty.signal(f"plant.{joint}.torque"),
                         reference.signal(f"plant.{joint}.torque")),
        classification=classify_run(violations),
        n_activations=n_act,
        min_gap_s=min_gap,
    )


def _run_cell_args(args) -> CellResult:
    return _run_cell(*args)


def run_sweep(plan: SweepPlan, jobs: int = 1) -> SweepResult:
    """Execute every (duration, seed) cell and aggregate.

    The cell list and its seed mapping are fixed by the plan, so any ``jobs``
    value produces identical results.
    """
    durations = tuple(sorted(plan.durations))
    if list(durations) != list(plan.durations):
        raise ValueError("durations must be strictly increasing")
    if len(set(durations)) != len(durations):
        raise ValueError("durations must be distinct")
    varied = plan.resolved_varied()
    primary = plan.resolved_primary()
    joint = plan.metric_joint()

    tasks = [(plan.scenario, varied, primary, joint, d, si, plan.base_seed)
             for d in durations for si in range(plan.seeds_per_duration)]
    if jobs <= 1:
        cells = [_run_cell_args(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell_args, tasks, chunksize=1))

    aggregates = []
    for d in durations:
        group = [c for c in cells if c.duration_s == d]
        metrics = {
            "rmse_pos_rad": [c.rmse_pos for c in group],
            "rmse_vel_rad_s": [c.rmse_vel for c in group],
            "rmse_torque_nm": [c.rmse_torque for c in group],
        }
        counts = {cls.value: sum(1 for c in group if c.classification is cls)
                  for cls in Classification}
        aggregates.append(DurationAggregate(
            duration_s=d,
            mean={k: float(np.mean(v)) for k, v in metrics.items()},
            min={k: float(np.min(v)) for k, v in metrics.items()},
            max={k: float(np.max(v)) for k, v in metrics.items()},
            counts=counts,
            failure_fraction=counts[Classification.FAILURE.value] / max(1, len(group)),
        ))

    fits = {}
    if len(durations) >= 3:
        for key in ("rmse_pos_rad", "rmse_vel_rad_s", "rmse_torque_nm"):
            fits[key] = fit_quadratic(durations, [a.mean[key] for a in aggregates])

    d_star = _first_crossing(aggregates)
    bins = _bin_runs(cells, plan.gap_threshold_s)
    bin_d_star = {name: _first_crossing_cells(group, durations)
                  for name, group in bins.items()}
    bin_counts = {name: len(group) for name, group in bins.items()}

    return SweepResult(
        plan_durations=durations,
        seeds_per_duration=plan.seeds_per_duration,
        base_seed=plan.base_seed,
        gap_threshold_s=plan.gap_threshold_s,
        cells=tuple(cells),
        aggregates=tuple(aggregates),
        fits=fits,
        d_star_s=d_star,
        bin_d_star_s=bin_d_star,
        bin_counts=bin_counts,
    )


def _first_crossing(aggregates) -> float | None:
    for agg in aggregates:
        if agg.failure_fraction >= 0.5:
            return agg.duration_s
    return None


def _first_crossing_cells(cells, durations) -> float | None:
    for d in durations:
        group = [c for c in cells if c.duration_s == d]
        if not group:
            continue
        frac = sum(1 for c in group if c.classification is Classification.FAILURE) / len(group)
        if frac >= 0.5:
            return d
    return None


def _bin_runs(cells, gap_threshold_s: float) -> dict:
    consecutive, isolated = [], []
    for c in cells:
        if c.n_activations >= 2 and c.min_gap_s is not None \
                and c.min_gap_s < gap_threshold_s:
            consecutive.append(c)
        else:
            isolated.append(c)
    return {"consecutive": consecutive, "isolated": isolated}


# --------------------------------------------------------------------------
# result files


RESULTS_HEADER = "duration_s,seed,rmse_pos_rad,rmse_vel_rad_s,rmse_torque_Nm,classification"


def write_results_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(RESULTS_HEADER + "\n")
        for c in result.cells:
            fh.write(c.row() + "\n")


def read_results_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if header != RESULTS_HEADER:
            raise ValueError(f"unexpected results header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d, seed, rp, rv, rt, cls = line.split(",")
            rows.append({
                "duration_s": float(d), "seed": int(seed), "rmse_pos_rad": float(rp),
                "rmse_vel_rad_s": float(rv), "rmse_torque_Nm": float(rt),
                "classification": Classification(cls),
            })
    return rows


def summary_dict(result: SweepResult) -> dict:
    return {
        "base_seed": result.base_seed,
        "seeds_per_duration": result.seeds_per_duration,
        "durations_s": list(result.plan_durations),
        "gap_threshold_s": result.gap_threshold_s,
        "aggregates": [
            {
                "duration_s": a.duration_s,
                "mean": a.mean,
                "min": a.min,
                "max": a.max,
                "classifications": a.counts,
                "failure_fraction": a.failure_fraction,
            }
            for a in result.aggregates
        ],
        "fit": {
            key: {"a": f.a, "b": f.b, "c": f.c, "residual": f.residual}
            for key, f in result.fits.items()
        },
        "d_star_s": result.d_star_s,
        "bins": {
            name: {"d_star_s": result.bin_d_star_s[name],
                   "runs": result.bin_counts[name]}
            for name in sorted(result.bin_d_star_s)
        },
    }


def write_summary_json(result: SweepResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary_dict(result), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_summary_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


# --------------------------------------------------------------------------
# single-fault robustness studies


@dataclass(frozen=True)
class ProbeOutcome:
    seed_index: int
    detail: str
    classification: Classification | None  # None when the run diverged
    diverged: bool


def _single_injector(cfg: ScenarioConfig, spec: faults.FaultSpec) -> ScenarioConfig:
    return replace(cfg, injectors=(spec,))


def run_bitflip_study(cfg: ScenarioConfig, joint: str, bits, n_seeds: int,
                      base_seed: int = 0) -> list[ProbeOutcome]:
    """Flip one random bit (from ``bits``) of the joint angle reading, once
    per run at a random time; classify each run."""
    bits = list(bits)
    outcomes = []
    for i in range(n_seeds):
        rng = np.random.default_rng(np.random.SeedSequence([base_seed, 7700 + i]))
        bit = int(bits[rng.integers(len(bits))])
        t_fire = float(rng.uniform(0.5, max(0.6, cfg.clock.t_end_s - 1.0)))
        spec = faults.FaultSpec(
            name="probe_bitflip",
            target_signal=f"plant.{joint}.pos",
            fault_type=faults.BitFlip(n_bits=1, bit_positions=(bit,)),
            event=faults.MeanTimeToFailure(mttf=t_fire, sigma=0.0),
            effect=faults.Once(),
        )
        outcomes.append(_probe_once(_single_injector(cfg, spec),
                                    cell_seed(base_seed, i), i, f"bit={bit}"))
    return outcomes


def run_small_fault_probes(cfg: ScenarioConfig, joint: str, n_seeds: int,
                           base_seed: int = 0) -> dict[str, list[ProbeOutcome]]:
    """Single spikes and small constant offsets on the joint angle reading."""
    results: dict[str, list[ProbeOutcome]] = {"spike": [], "offset": []}
    for i in range(n_seeds):
        rng = np.random.default_rng(np.random.SeedSequence([base_seed, 8800 + i]))
        t_fire = float(rng.uniform(0.5, max(0.6, cfg.clock.t_end_s - 1.0)))
        spike = faults.FaultSpec(
            name="probe_spike", target_signal=f"plant.{joint}.pos",
            fault_type=faults.PackageDrop(replacement=0.0),
            event=faults.MeanTimeToFailure(mttf=t_fire, sigma=0.0),
            effect=faults.Once(),
        )
        offset = faults.FaultSpec(
            name="probe_offset", target_signal=f"plant.{joint}.pos",
            fault_type=faults.Bias(offset=0.02),
            event=faults.MeanTimeToFailure(mttf=t_fire, sigma=0.0),
            effect=faults.ConstantTime(duration=0.1),
        )
        seed = cell_seed(base_seed, i)
        results["spike"].append(_probe_once(_single_injector(cfg, spike), seed, i, "spike"))
        results["offset"].append(_probe_once(_single_injector(cfg, offset), seed, i, "offset"))
    return results


def _probe_once(cfg: ScenarioConfig, seed: int, index: int, detail: str) -> ProbeOutcome:
    try:
        out = simulate(cfg, seed=seed)
    except engine.NumericalDivergence:
        return ProbeOutcome(seed_index=index, detail=detail, classification=None,
                            diverged=True)
    return ProbeOutcome(seed_index=index, detail=detail,
                        classification=out.classification, diverged=False)
