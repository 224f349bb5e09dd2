"""
Command-line front end for locbench.

Verbs:
    solve     run solvers on a measurement fixture
    bench     run a Monte Carlo experiment and write CSV reports
    scenario  write a scenario fixture with one sampled measurement set

Exit codes: 0 success, 2 configuration error, 3 solver error.
Numbers are printed with Python's shortest round-trip repr.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from locbench import __version__
from locbench.config import config, ExperimentFile, load_experiment_file
from locbench.services.bench import build_solver_configs, run_experiment, search_radius_for, SOLVER_FUNCTIONS
from locbench.services.errors import (
    ConfigError,
    DegenerateGeometryError,
    InvalidParameterError,
    SolverError,
)
from locbench.services.model import Position2D, SignalParams, distance, make_ring_scenario, sample_measurements
from locbench.services.objective import ObjectiveContext
from locbench.services.reporting import RunManifest, read_fixture, write_fixture, write_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

SOLVER_CHOICES = ("grid", "gd", "pso", "all")


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging to stderr; stdout is reserved for command output."""
    logging.basicConfig(
        level=(level or config.logging.level).upper(),
        format=config.logging.format,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_experiment(path: Optional[str], seed: Optional[int], solver: Optional[str]) -> ExperimentFile:
    """Load the config file (or defaults) and apply command-line overrides."""
    experiment = load_experiment_file(path) if path else ExperimentFile()
    overrides = {}
    if seed is not None:
        overrides["master_seed"] = seed
    if solver is not None and solver != "all":
        overrides["solvers"] = [solver]
    if not overrides:
        return experiment
    try:
        return ExperimentFile.model_validate({**experiment.model_dump(), **overrides})
    except ValidationError as e:
        raise ConfigError(f"invalid command-line override: {e}") from e


# ============================================================
# solve
# ============================================================

def cmd_solve(args: argparse.Namespace) -> int:
    """Run the chosen solvers on a measurement fixture and print the estimates."""
    try:
        experiment = _load_experiment(args.config, None, args.solver)
        scenario, measurements, seed = read_fixture(args.measurements)
        if args.seed is not None:
            seed = args.seed
        suite = experiment.solver_suite()
        ctx = ObjectiveContext.from_scenario(scenario, measurements, suite.residual_units)
        radius = search_radius_for(scenario)
    except (ConfigError, InvalidParameterError, DegenerateGeometryError) as e:
        return _fail(EXIT_CONFIG, str(e))

    try:
        configs = build_solver_configs(scenario, ctx, suite, seed, radius)
    except InvalidParameterError as e:
        return _fail(EXIT_CONFIG, str(e))
    except (SolverError, DegenerateGeometryError) as e:
        return _fail(EXIT_SOLVER, f"initialization failed: {e}")

    for name in suite.solvers:
        logger.info(f"Solving with {name}")
        start = time.perf_counter()
        try:
            result = SOLVER_FUNCTIONS[name](ctx, configs.for_solver(name))
        except (SolverError, DegenerateGeometryError) as e:
            return _fail(EXIT_SOLVER, f"{name}: {type(e).__name__}: {e}")
        elapsed = time.perf_counter() - start

        est = result.estimate
        print(f"solver: {name}")
        print(f"  x_m = {est.x!r}")
        print(f"  y_m = {est.y!r}")
        print(f"  p0_dbm = {est.p0!r}")
        print(f"  b_m = {est.b!r}")
        print(f"  tau_s = {est.tau!r}")
        print(f"  cost = {result.cost!r}")
        print(f"  evaluations = {result.evaluations}")
        print(f"  time_s = {elapsed!r}")
        print(f"  error_m = {distance(est.position, scenario.target)!r}")
    return EXIT_OK


# ============================================================
# bench
# ============================================================

def _fmt(value: Optional[float], digits: int = 4) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


def print_summary(report, console: Optional[Console] = None) -> None:
    """Accuracy table (80% / 95% rows per solver) plus a mean-time column."""
    console = console or Console(width=120)
    table = Table(title="Localization error (m) and mean solve time (s)")
    table.add_column("solver")
    table.add_column("RMSE", justify="right")
    table.add_column("80%", justify="right")
    table.add_column("95%", justify="right")
    table.add_column("mean time", justify="right")
    table.add_column("failed", justify="right")
    for name in report.solvers:
        s = report.summaries[name]
        table.add_row(name, _fmt(s.rmse), _fmt(s.p80), _fmt(s.p95),
                      _fmt(s.mean_time_s, 6), f"{s.n_failed}/{s.n_trials}")
    console.print(table)


def cmd_bench(args: argparse.Namespace) -> int:
    """Run an experiment, write the report files and print the summary."""
    try:
        experiment = _load_experiment(args.config, args.seed, args.solver)
        cfg = experiment.to_experiment_config(warmup_default=config.bench.warmup)
    except (ConfigError, InvalidParameterError) as e:
        return _fail(EXIT_CONFIG, str(e))

    out_dir = Path(args.out or config.paths.output_dir)
    progress = config.bench.show_progress and not args.no_progress
    try:
        report = run_experiment(cfg, progress=progress)
    except (InvalidParameterError, DegenerateGeometryError) as e:
        return _fail(EXIT_CONFIG, str(e))

    manifest = RunManifest(
        config=experiment.snapshot(),
        tool_version=__version__,
        master_seed=cfg.master_seed,
    )
    try:
        write_report(report, manifest, out_dir)
    except OSError as e:
        return _fail(EXIT_CONFIG, f"cannot write reports to {out_dir}: {e}")

    print_summary(report)
    return EXIT_OK


# ============================================================
# scenario
# ============================================================

def cmd_scenario(args: argparse.Namespace) -> int:
    """Write a ring scenario and one sampled measurement set."""
    try:
        signal = SignalParams(
            p0_true=args.p0,
            beta=args.beta,
            sigma_rss=args.sigma_rss,
            sigma_toa=args.sigma_toa,
            tau_true=args.tau,
        )
        scenario = make_ring_scenario(Position2D(args.target_x, args.target_y), args.radius,
                                      args.n_receivers, signal)
        measurements = sample_measurements(scenario, args.seed)
    except (InvalidParameterError, DegenerateGeometryError) as e:
        return _fail(EXIT_CONFIG, str(e))

    out = Path(args.out) if args.out else Path(config.paths.output_dir) / "scenario.json"
    try:
        write_fixture(out, scenario, measurements, args.seed)
    except OSError as e:
        return _fail(EXIT_CONFIG, f"cannot write {out}: {e}")
    print(f"wrote {out}")
    return EXIT_OK


# ============================================================
# Argument parsing
# ============================================================

def build_parser() -> argparse.ArgumentParser:
    defaults = SignalParams()
    parser = argparse.ArgumentParser(prog="locbench", description="RSS/TOA localization solver benchmark")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="logging level (default from LOCBENCH_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one measurement fixture")
    solve.add_argument("--config", help="experiment JSON file (defaults apply when omitted)")
    solve.add_argument("--measurements", required=True, help="fixture written by 'scenario'")
    solve.add_argument("--solver", choices=SOLVER_CHOICES, default=None)
    solve.add_argument("--seed", type=int, default=None, help="PSO seed (default: the fixture seed)")
    solve.set_defaults(func=cmd_solve)

    bench = sub.add_parser("bench", help="run a Monte Carlo experiment")
    bench.add_argument("--config", help="experiment JSON file (defaults apply when omitted)")
    bench.add_argument("--out", help="output directory (default from LOCBENCH_OUTPUT_DIR)")
    bench.add_argument("--seed", type=int, default=None, help="override master_seed")
    bench.add_argument("--solver", choices=SOLVER_CHOICES, default=None)
    bench.add_argument("--no-progress", action="store_true", help="hide the trial progress bar")
    bench.set_defaults(func=cmd_bench)

    scenario = sub.add_parser("scenario", help="write a ring scenario fixture")
    scenario.add_argument("--radius", type=float, default=100.0)
    scenario.add_argument("--n-receivers", type=int, default=4)
    scenario.add_argument("--target-x", type=float, default=0.0)
    scenario.add_argument("--target-y", type=float, default=0.0)
    scenario.add_argument("--seed", type=int, default=0)
    scenario.add_argument("--p0", type=float, default=defaults.p0_true)
    scenario.add_argument("--beta", type=float, default=defaults.beta)
    scenario.add_argument("--sigma-rss", type=float, default=defaults.sigma_rss)
    scenario.add_argument("--sigma-toa", type=float, default=defaults.sigma_toa)
    scenario.add_argument("--tau", type=float, default=defaults.tau_true)
    scenario.add_argument("--out", help="fixture path (default <output dir>/scenario.json)")
    scenario.set_defaults(func=cmd_scenario)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
