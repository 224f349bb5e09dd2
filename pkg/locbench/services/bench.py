"""
Monte Carlo experiment harness.

Runs repeated seeded trials per receiver geometry, solves each trial's
measurements with every enabled solver and aggregates accuracy and wall-time
metrics per solver.
"""

import math
import time
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from locbench.services.errors import InvalidParameterError, LocalizationError, SolverError
from locbench.services.model import (
    MeasurementSet,
    Position2D,
    Scenario,
    SignalParams,
    distance,
    make_multi_radius_scenario,
    make_ring_scenario,
    sample_measurements,
)
from locbench.services.objective import ObjectiveContext, ParamVector, truth_params
from locbench.services.optim import (
    OFFSET_INIT_B,
    OFFSET_INIT_DX,
    OFFSET_INIT_DY,
    OFFSET_INIT_P0,
    SOLVER_NAMES,
    GdConfig,
    GridSpec,
    PsoConfig,
    SolveResult,
    build_grid_spec,
    coarse_grid_initializer,
    gradient_descent,
    grid_search,
    offset_initializer,
    pso,
    pso_bounds,
)

logger = logging.getLogger(__name__)

GEOMETRIES = ("ring", "distinct_radii")
INIT_METHODS = ("offset", "coarse_grid")

STATUS_OK = "ok"
STATUS_FAILED = "failed"


# ============================================================
# Solver settings (relative to a scenario)
# ============================================================

@dataclass(frozen=True)
class InitSettings:
    """How the initial estimate is produced."""
    method: str = "offset"
    dx: float = OFFSET_INIT_DX
    dy: float = OFFSET_INIT_DY
    p0: float = OFFSET_INIT_P0
    b: float = OFFSET_INIT_B
    coarse_points: int = 16

    def __post_init__(self):
        if self.method not in INIT_METHODS:
            raise InvalidParameterError(f"init method must be one of {INIT_METHODS}, got {self.method!r}")


@dataclass(frozen=True)
class GridSettings:
    """Grid search space; the position half span is span_factor times the radius."""
    span_factor: float = 1.0
    xy_interval: float = 1.0
    p0_half_span: float = 3.0
    p0_interval: float = 0.5
    b_half_span: float = 25.0
    b_interval: float = 5.0
    center: Optional[ParamVector] = None

    def __post_init__(self):
        spans = {"span_factor": self.span_factor, "p0_half_span": self.p0_half_span,
                 "b_half_span": self.b_half_span}
        for name, value in spans.items():
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class GdSettings:
    gamma: float = 0.001
    max_iters: int = 200
    grad_tol: Optional[float] = None


@dataclass(frozen=True)
class PsoSettings:
    """PSO hyperparameters; seed None means the trial seed is used."""
    max_iters: int = 200
    swarm_size: int = 100
    inertia: float = 0.8
    c1: float = 0.1
    c2: float = 0.1
    seed: Optional[int] = None


@dataclass(frozen=True)
class SolverSuite:
    """Settings for all three solvers plus which of them run."""
    solvers: Tuple[str, ...] = SOLVER_NAMES
    residual_units: str = "seconds"
    init: InitSettings = field(default_factory=InitSettings)
    grid: GridSettings = field(default_factory=GridSettings)
    gd: GdSettings = field(default_factory=GdSettings)
    pso: PsoSettings = field(default_factory=PsoSettings)

    def __post_init__(self):
        object.__setattr__(self, "solvers", tuple(self.solvers))
        if not self.solvers:
            raise InvalidParameterError("at least one solver must be enabled")
        unknown = [s for s in self.solvers if s not in SOLVER_NAMES]
        if unknown:
            raise InvalidParameterError(f"unknown solvers {unknown}; expected a subset of {SOLVER_NAMES}")


@dataclass(frozen=True)
class SolverConfigs:
    """Concrete configurations for one trial; only enabled solvers get one."""
    init: ParamVector
    grid: GridSpec
    gd: Optional[GdConfig] = None
    pso: Optional[PsoConfig] = None

    def for_solver(self, name: str):
        return {"grid": self.grid, "gd": self.gd, "pso": self.pso}[name]


SOLVER_FUNCTIONS: Dict[str, Callable[[ObjectiveContext, Any], SolveResult]] = {
    "grid": grid_search,
    "gd": gradient_descent,
    "pso": pso,
}


def search_radius_for(scenario: Scenario) -> float:
    """Largest target-receiver distance; sizes the search space."""
    return max(distance(scenario.target, rx) for rx in scenario.receivers)


def build_search_space(scenario: Scenario, ctx: ObjectiveContext, suite: SolverSuite,
                       radius: float) -> Tuple[ParamVector, GridSpec]:
    """
    Initial estimate plus the grid shared by grid search and PSO.

    The grid is centered on the initial estimate unless a center is
    configured.
    """
    if suite.init.method == "offset":
        init = offset_initializer(truth_params(scenario), suite.init.dx, suite.init.dy,
                                  suite.init.p0, suite.init.b)
    else:
        # Truth-free: coarse position grid around the receivers' centroid
        centroid = scenario.receiver_array().mean(axis=0)
        center = ParamVector(centroid[0], centroid[1], suite.init.p0, suite.init.b)
        init = coarse_grid_initializer(ctx, center, suite.grid.span_factor * radius,
                                       suite.init.coarse_points)

    g = suite.grid
    grid_spec = build_grid_spec(
        center=g.center if g.center is not None else init,
        radius=radius,
        span_factor=g.span_factor,
        xy_interval=g.xy_interval,
        p0_half_span=g.p0_half_span,
        p0_interval=g.p0_interval,
        b_half_span=g.b_half_span,
        b_interval=g.b_interval,
    )
    return init, grid_spec


def build_solver_config(name: str, init: ParamVector, grid_spec: GridSpec, suite: SolverSuite,
                        trial_seed: int) -> Any:
    """Configuration of one solver; the PSO box equals the grid search space."""
    if name == "grid":
        return grid_spec
    if name == "gd":
        return GdConfig(init=init, gamma=suite.gd.gamma, max_iters=suite.gd.max_iters,
                        grad_tol=suite.gd.grad_tol)
    lower, upper = pso_bounds(grid_spec)
    p = suite.pso
    return PsoConfig(
        lower=lower,
        upper=upper,
        max_iters=p.max_iters,
        swarm_size=p.swarm_size,
        inertia=p.inertia,
        c1=p.c1,
        c2=p.c2,
        seed=p.seed if p.seed is not None else trial_seed,
    )


def build_solver_configs(scenario: Scenario, ctx: ObjectiveContext, suite: SolverSuite,
                         trial_seed: int, search_radius: Optional[float] = None) -> SolverConfigs:
    """Turn relative solver settings into configurations for one trial."""
    radius = search_radius if search_radius is not None else search_radius_for(scenario)
    init, grid_spec = build_search_space(scenario, ctx, suite, radius)
    configs = {
        name: build_solver_config(name, init, grid_spec, suite, trial_seed)
        for name in suite.solvers if name != "grid"
    }
    return SolverConfigs(init=init, grid=grid_spec, gd=configs.get("gd"), pso=configs.get("pso"))


# ============================================================
# Trials
# ============================================================

@dataclass
class TrialOutcome:
    """One solver's result on one trial."""
    solver: str
    status: str
    estimate: Optional[ParamVector] = None
    error_m: Optional[float] = None
    time_s: float = 0.0
    evaluations: int = 0
    cost: Optional[float] = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


@dataclass
class TrialResult:
    """All solver outcomes for one sampled measurement set."""
    radius: float
    trial: int
    seed: int
    measurements: MeasurementSet
    outcomes: Dict[str, TrialOutcome] = field(default_factory=dict)


def _timed_solve(name: str, ctx: ObjectiveContext, solver_config: Any) -> Tuple[SolveResult, float]:
    solve = SOLVER_FUNCTIONS[name]
    start = time.perf_counter()
    result = solve(ctx, solver_config)
    elapsed = time.perf_counter() - start
    return result, elapsed


def run_trial(scenario: Scenario, suite: SolverSuite, trial_seed: int,
              search_radius: Optional[float] = None, trial: int = 0) -> TrialResult:
    """
    Sample one measurement set and solve it with every enabled solver.

    A solver that raises is recorded as failed; the other solvers still run.
    Wall time covers the solver call only.
    """
    measurements = sample_measurements(scenario, trial_seed)
    ctx = ObjectiveContext.from_scenario(scenario, measurements, suite.residual_units)
    radius = search_radius if search_radius is not None else search_radius_for(scenario)
    result = TrialResult(radius=radius, trial=trial, seed=trial_seed, measurements=measurements)

    try:
        init, grid_spec = build_search_space(scenario, ctx, suite, radius)
    except LocalizationError as e:
        logger.warning(f"Trial {trial} (seed {trial_seed}): initialization failed: {e}")
        for name in suite.solvers:
            result.outcomes[name] = TrialOutcome(name, STATUS_FAILED, message=f"init: {e}")
        return result

    for name in suite.solvers:
        try:
            solver_config = build_solver_config(name, init, grid_spec, suite, trial_seed)
            solved, elapsed = _timed_solve(name, ctx, solver_config)
        except LocalizationError as e:
            logger.warning(f"Trial {trial} (seed {trial_seed}): {name} failed: {type(e).__name__}: {e}")
            result.outcomes[name] = TrialOutcome(name, STATUS_FAILED, message=f"{type(e).__name__}: {e}")
            continue

        result.outcomes[name] = TrialOutcome(
            solver=name,
            status=STATUS_OK,
            estimate=solved.estimate,
            error_m=distance(solved.estimate.position, scenario.target),
            time_s=elapsed,
            evaluations=solved.evaluations,
            cost=solved.cost,
        )
    return result


# ============================================================
# Metrics
# ============================================================

def _as_errors(errors: Sequence[float]) -> np.ndarray:
    values = np.asarray(list(errors), dtype=float)
    if values.size == 0:
        raise InvalidParameterError("error list is empty")
    return values


def rmse(errors: Sequence[float]) -> float:
    """Root mean square of the errors."""
    values = _as_errors(errors)
    return math.sqrt(float(np.mean(values * values)))


def mean_absolute_error(errors: Sequence[float]) -> float:
    return float(np.mean(np.abs(_as_errors(errors))))


def percentile(errors: Sequence[float], q: float) -> float:
    """
    Nearest-rank percentile: the smallest value such that at least q% of the
    samples are <= it.
    """
    values = np.sort(_as_errors(errors))
    if not (0 < q <= 100):
        raise InvalidParameterError(f"q must be in (0, 100], got {q}")
    n = values.size
    rank = min(max(math.ceil(q * n / 100.0), 1), n)
    return float(values[rank - 1])


def cdf_points(errors: Sequence[float]) -> List[Tuple[float, float]]:
    """Sorted errors paired with their cumulative fraction k/n."""
    values = np.sort(_as_errors(errors))
    n = values.size
    return [(float(v), (k + 1) / n) for k, v in enumerate(values)]


@dataclass
class SolverSummary:
    """Aggregated metrics of one solver; metric fields are None when every trial failed."""
    solver: str
    n_trials: int
    n_failed: int
    rmse: Optional[float] = None
    p80: Optional[float] = None
    p95: Optional[float] = None
    mae: Optional[float] = None
    mean_time_s: Optional[float] = None
    mean_evaluations: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "solver": self.solver,
            "n_trials": self.n_trials,
            "n_failed": self.n_failed,
            "rmse_m": self.rmse,
            "p80_m": self.p80,
            "p95_m": self.p95,
            "mae_m": self.mae,
            "mean_time_s": self.mean_time_s,
            "mean_evaluations": self.mean_evaluations,
        }


def summarize_solver(solver: str, outcomes: Sequence[TrialOutcome]) -> SolverSummary:
    """Metrics over the successful outcomes; failures are only counted."""
    ok = [o for o in outcomes if o.ok]
    summary = SolverSummary(solver=solver, n_trials=len(outcomes), n_failed=len(outcomes) - len(ok))
    if not ok:
        return summary

    errors = [o.error_m for o in ok]
    summary.rmse = rmse(errors)
    summary.p80 = percentile(errors, 80)
    summary.p95 = percentile(errors, 95)
    summary.mae = mean_absolute_error(errors)
    summary.mean_time_s = float(np.mean([o.time_s for o in ok]))
    summary.mean_evaluations = float(np.mean([o.evaluations for o in ok]))
    return summary


# ============================================================
# Experiments
# ============================================================

@dataclass(frozen=True)
class ExperimentConfig:
    """A full Monte Carlo experiment."""
    radii: Tuple[float, ...] = (50.0, 100.0, 150.0, 200.0)
    trials_per_radius: int = 90
    n_receivers: int = 4
    geometry: str = "ring"
    target: Position2D = field(default_factory=lambda: Position2D(0.0, 0.0))
    signal: SignalParams = field(default_factory=SignalParams)
    suite: SolverSuite = field(default_factory=SolverSuite)
    master_seed: int = 0
    warmup: bool = True

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if not self.radii:
            raise InvalidParameterError("radii must not be empty")
        if any(not (math.isfinite(r) and r > 0) for r in self.radii):
            raise InvalidParameterError(f"radii must be positive, got {self.radii}")
        if self.trials_per_radius < 1:
            raise InvalidParameterError(f"trials_per_radius must be at least 1, got {self.trials_per_radius}")
        if self.n_receivers < 1:
            raise InvalidParameterError(f"n_receivers must be at least 1, got {self.n_receivers}")
        if self.geometry not in GEOMETRIES:
            raise InvalidParameterError(f"geometry must be one of {GEOMETRIES}, got {self.geometry!r}")
        if self.master_seed < 0:
            raise InvalidParameterError(f"master_seed must be non-negative, got {self.master_seed}")

    def scenarios(self) -> List[Tuple[float, Scenario]]:
        """(search radius, scenario) per experiment group."""
        if self.geometry == "distinct_radii":
            scenario = make_multi_radius_scenario(self.target, self.radii, self.signal)
            return [(max(self.radii), scenario)]
        return [
            (radius, make_ring_scenario(self.target, radius, self.n_receivers, self.signal))
            for radius in self.radii
        ]


@dataclass
class ExperimentReport:
    """Per-trial records plus per-solver aggregates."""
    solvers: Tuple[str, ...]
    trials: List[TrialResult]
    summaries: Dict[str, SolverSummary]

    def outcomes(self, solver: str) -> List[TrialOutcome]:
        return [t.outcomes[solver] for t in self.trials]

    def errors(self, solver: str) -> List[float]:
        """Position errors of the successful trials, in trial order."""
        return [o.error_m for o in self.outcomes(solver) if o.ok]


def check_experiment(cfg: ExperimentConfig) -> None:
    """
    Build every enabled solver configuration once per geometry.

    Raises:
        InvalidParameterError: if a solver setting or search box is invalid
    """
    suite = cfg.suite
    for radius, scenario in cfg.scenarios():
        measurements = sample_measurements(scenario, cfg.master_seed)
        ctx = ObjectiveContext.from_scenario(scenario, measurements, suite.residual_units)
        try:
            init, grid_spec = build_search_space(scenario, ctx, suite, radius)
        except SolverError as e:
            # Depends on the sampled measurements; the trials record it per solver
            logger.warning(f"Radius {radius:g} m: initialization check failed: {e}")
            continue
        for name in suite.solvers:
            build_solver_config(name, init, grid_spec, suite, cfg.master_seed)


def run_experiment(cfg: ExperimentConfig, progress: bool = False) -> ExperimentReport:
    """
    Run every trial of an experiment sequentially.

    Trial k overall (radius index r, trial t) uses seed master_seed + k with
    k = r * trials_per_radius + t. Scenarios and solver configurations are
    built and checked before the first trial so configuration errors surface
    early.
    """
    check_experiment(cfg)
    groups = cfg.scenarios()
    suite = cfg.suite
    total = len(groups) * cfg.trials_per_radius
    logger.info(f"Running {total} trials over {len(groups)} geometries with solvers {list(suite.solvers)}")

    if cfg.warmup:
        radius, scenario = groups[0]
        logger.debug("Warm-up trial (untimed, discarded)")
        run_trial(scenario, suite, cfg.master_seed, radius)

    trials: List[TrialResult] = []
    with tqdm(total=total, desc="Trials", unit="trial", disable=not progress) as bar:
        for group_index, (radius, scenario) in enumerate(groups):
            logger.info(f"Radius {radius:g} m: {cfg.trials_per_radius} trials")
            for t in range(cfg.trials_per_radius):
                seed = cfg.master_seed + group_index * cfg.trials_per_radius + t
                trials.append(run_trial(scenario, suite, seed, radius, trial=t))
                bar.update(1)

    summaries = {
        name: summarize_solver(name, [trial.outcomes[name] for trial in trials])
        for name in suite.solvers
    }
    for name, summary in summaries.items():
        if summary.n_failed:
            logger.warning(f"{name}: {summary.n_failed} of {summary.n_trials} trials failed")
    return ExperimentReport(solvers=suite.solvers, trials=trials, summaries=summaries)
