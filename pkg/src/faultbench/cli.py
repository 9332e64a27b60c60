"""Command-line front end: scenario validation, single runs, duration sweeps.

Exit codes
    validate:  0 valid, 1 schema/semantic violations, 2 unreadable file
    run:       0 Nominal, 3 Error, 4 Failure, 2 config error, 5 divergence
    sweep:     0 completed, 2 config error, 5 divergence in any cell
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import engine, experiments, svgplot
from .experiments import Classification
from .scenario import ScenarioError, ScenarioParseError, load_scenario, load_scenario_file

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_CONFIG = 2
EXIT_ERROR = 3
EXIT_FAILURE = 4
EXIT_DIVERGENCE = 5

CLASS_EXIT = {
    Classification.NOMINAL: EXIT_OK,
    Classification.ERROR: EXIT_ERROR,
    Classification.FAILURE: EXIT_FAILURE,
}


def _default_jobs() -> int:
    raw = os.environ.get("FAULTBENCH_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed (u64)")
    common.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory (default: ./out)")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(
        prog="faultbench",
        description="Fault-injection simulation of a trajectory-controlled "
                    "multi-joint exoskeleton",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", parents=[common],
                           help="check a scenario file against the schema")
    p_val.add_argument("scenario", help="scenario JSON file (or a shipped preset name)")

    p_run = sub.add_parser("run", parents=[common], help="execute one simulation run")
    p_run.add_argument("scenario")
    p_run.add_argument("--disable-faults", action="store_true",
                       help="run with every injector disabled (reference behaviour)")

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="Monte-Carlo fault-duration sweep")
    p_sweep.add_argument("scenario")
    group = p_sweep.add_mutually_exclusive_group()
    group.add_argument("--preset", choices=("coarse", "fine"),
                       help="coarse: 0.5..3.0 s step 0.25; fine: 0.05..0.5 s step 0.05")
    group.add_argument("--durations", type=str, default=None,
                       help="comma-separated fault durations in seconds")
    p_sweep.add_argument("--seeds", type=int, default=20, help="seeds per duration")
    p_sweep.add_argument("--jobs", type=int, default=_default_jobs(),
                         help="parallel worker processes (env FAULTBENCH_JOBS)")
    return parser


def cmd_validate(args) -> int:
    try:
        _, violations = load_scenario_file(args.scenario)
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if violations:
        for v in violations:
            print(v)
        return EXIT_VIOLATIONS
    print("OK")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        cfg = load_scenario(args.scenario)
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioError as exc:
        for v in exc.violations:
            print(v, file=sys.stderr)
        return EXIT_CONFIG

    seed = cfg.seed if args.seed is None else args.seed
    try:
        out = experiments.simulate(cfg, seed=seed,
                                   faults_enabled=not args.disable_faults)
    except engine.NumericalDivergence as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE

    args.out.mkdir(parents=True, exist_ok=True)
    trace_path = args.out / "trace.csv"
    out.trace.to_csv(trace_path)
    violations_path = args.out / "violations.csv"
    with open(violations_path, "w", newline="") as fh:
        fh.write("t,joint,kind,value\n")
        for v in out.violations:
            fh.write(f"{v.t:.9g},{v.joint},{v.kind.value},{v.value:.9g}\n")

    if not args.quiet:
        print(f"trace: {trace_path} ({len(out.trace)} steps, "
              f"{len(out.trace.columns)} signals)", file=sys.stderr)
        print(f"violations: {violations_path} ({len(out.violations)} records)",
              file=sys.stderr)
    print(out.classification.value)
    return CLASS_EXIT[out.classification]


def cmd_sweep(args) -> int:
    try:
        cfg = load_scenario(args.scenario)
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioError as exc:
        for v in exc.violations:
            print(v, file=sys.stderr)
        return EXIT_CONFIG

    if args.preset == "coarse":
        durations = experiments.COARSE_DURATIONS
    elif args.preset == "fine" or args.durations is None:
        durations = experiments.FINE_DURATIONS
    else:
        try:
            durations = tuple(sorted(float(d) for d in args.durations.split(",")))
        except ValueError:
            print(f"bad --durations list: {args.durations!r}", file=sys.stderr)
            return EXIT_CONFIG

    base_seed = cfg.seed if args.seed is None else args.seed
    plan = experiments.SweepPlan(scenario=cfg, durations=durations,
                                 seeds_per_duration=args.seeds, base_seed=base_seed)
    try:
        plan.resolved_varied()
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG

    if not args.quiet:
        print(f"sweep: {len(durations)} durations x {args.seeds} seeds, "
              f"jobs={args.jobs}", file=sys.stderr)
    try:
        result = experiments.run_sweep(plan, jobs=args.jobs)
    except engine.NumericalDivergence as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE

    args.out.mkdir(parents=True, exist_ok=True)
    experiments.write_results_csv(result, args.out / "sweep_results.csv")
    experiments.write_summary_json(result, args.out / "sweep_summary.json")

    fit = result.fits.get("rmse_pos_rad")
    svg = svgplot.render_sweep_plot(
        [a.duration_s for a in result.aggregates],
        [a.mean["rmse_pos_rad"] for a in result.aggregates],
        [a.min["rmse_pos_rad"] for a in result.aggregates],
        [a.max["rmse_pos_rad"] for a in result.aggregates],
        (fit.a, fit.b, fit.c) if fit else None,
        title="Joint angle deviation vs fault duration",
        xlabel="fault duration [s]",
        ylabel="position RMSE [rad]",
    )
    (args.out / "rmse_plot.svg").write_text(svg)

    if not args.quiet:
        for agg in result.aggregates:
            print(f"  d={agg.duration_s:g}s mean_pos_rmse="
                  f"{agg.mean['rmse_pos_rad']:.4f} rad failures="
                  f"{agg.counts['Failure']}/{sum(agg.counts.values())}", file=sys.stderr)
        d_star = result.d_star_s
        print(f"  failure threshold d*: "
              f"{'not crossed' if d_star is None else f'{d_star:g} s'}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "sweep":
        return cmd_sweep(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
