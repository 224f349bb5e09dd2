"""
Schema of the experiment file.

The file is JSON with sections scenario, signal, objective, init, grid, gd,
pso plus top-level solvers, master_seed and warmup. Every key is optional;
an empty object reproduces the field-campaign setup. Unknown keys are
rejected so a misspelled hyperparameter cannot be silently ignored.
"""

import json
import logging
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from locbench.services.bench import (
    ExperimentConfig,
    GdSettings,
    GridSettings,
    InitSettings,
    PsoSettings,
    SolverSuite,
)
from locbench.services.errors import ConfigError
from locbench.services.model import Position2D, SignalParams
from locbench.services.objective import ParamVector

logger = logging.getLogger(__name__)

SolverName = Literal["grid", "gd", "pso"]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PositionModel(StrictModel):
    x: float = 0.0
    y: float = 0.0


class ParamModel(StrictModel):
    x: float
    y: float
    p0: float
    b: float

    def to_param_vector(self) -> ParamVector:
        return ParamVector(self.x, self.y, self.p0, self.b)


class ScenarioSection(StrictModel):
    radii: List[float] = Field(default_factory=lambda: [50.0, 100.0, 150.0, 200.0], min_length=1)
    trials_per_radius: int = Field(default=90, ge=1)
    n_receivers: int = Field(default=4, ge=1)
    geometry: Literal["ring", "distinct_radii"] = "ring"
    target: PositionModel = Field(default_factory=PositionModel)


class SignalSection(StrictModel):
    p0_true: float = -58.5
    beta: float = Field(default=3.0, gt=0)
    d0: float = 1.0
    sigma_rss: float = Field(default=6.0, ge=0)
    sigma_toa: float = Field(default=1.0e-7, ge=0)
    tau_true: float = 4.5e-6


class ObjectiveSection(StrictModel):
    residual_units: Literal["seconds", "meters"] = "seconds"


class InitSection(StrictModel):
    method: Literal["offset", "coarse_grid"] = "offset"
    dx: float = -20.0
    dy: float = -20.0
    p0: float = -60.0
    b: float = 1350.0
    coarse_points: int = Field(default=16, ge=1)


class GridSection(StrictModel):
    # Zero or negative steps are left to the solver, which reports an empty grid
    span_factor: float = Field(default=1.0, gt=0)
    xy_interval: float = 1.0
    p0_half_span: float = Field(default=3.0, gt=0)
    p0_interval: float = 0.5
    b_half_span: float = Field(default=25.0, gt=0)
    b_interval: float = 5.0
    center: Optional[ParamModel] = None


class GdSection(StrictModel):
    gamma: float = Field(default=0.001, gt=0)
    max_iters: int = Field(default=200, ge=1)
    grad_tol: Optional[float] = Field(default=None, ge=0)


class PsoSection(StrictModel):
    max_iters: int = Field(default=200, ge=1)
    swarm_size: int = Field(default=100, ge=1)
    inertia: float = 0.8
    c1: float = 0.1
    c2: float = 0.1
    seed: Optional[int] = Field(default=None, ge=0)


class ExperimentFile(StrictModel):
    """Top-level experiment file."""
    scenario: ScenarioSection = Field(default_factory=ScenarioSection)
    signal: SignalSection = Field(default_factory=SignalSection)
    objective: ObjectiveSection = Field(default_factory=ObjectiveSection)
    init: InitSection = Field(default_factory=InitSection)
    grid: GridSection = Field(default_factory=GridSection)
    gd: GdSection = Field(default_factory=GdSection)
    pso: PsoSection = Field(default_factory=PsoSection)
    solvers: List[SolverName] = Field(default_factory=lambda: ["grid", "gd", "pso"], min_length=1)
    master_seed: int = Field(default=0, ge=0)
    warmup: Optional[bool] = None

    def signal_params(self) -> SignalParams:
        return SignalParams(**self.signal.model_dump())

    def solver_suite(self) -> SolverSuite:
        g = self.grid
        return SolverSuite(
            solvers=tuple(self.solvers),
            residual_units=self.objective.residual_units,
            init=InitSettings(**self.init.model_dump()),
            grid=GridSettings(
                span_factor=g.span_factor,
                xy_interval=g.xy_interval,
                p0_half_span=g.p0_half_span,
                p0_interval=g.p0_interval,
                b_half_span=g.b_half_span,
                b_interval=g.b_interval,
                center=g.center.to_param_vector() if g.center is not None else None,
            ),
            gd=GdSettings(**self.gd.model_dump()),
            pso=PsoSettings(**self.pso.model_dump()),
        )

    def to_experiment_config(self, warmup_default: bool = True) -> ExperimentConfig:
        s = self.scenario
        return ExperimentConfig(
            radii=tuple(s.radii),
            trials_per_radius=s.trials_per_radius,
            n_receivers=s.n_receivers,
            geometry=s.geometry,
            target=Position2D(s.target.x, s.target.y),
            signal=self.signal_params(),
            suite=self.solver_suite(),
            master_seed=self.master_seed,
            warmup=self.warmup if self.warmup is not None else warmup_default,
        )

    def snapshot(self) -> dict:
        """Plain-JSON copy with every default filled in."""
        return self.model_dump(mode="json")


def load_experiment_file(path: Union[str, Path]) -> ExperimentFile:
    """
    Read and validate an experiment file.

    Raises:
        ConfigError: if the file is missing, is not JSON, or fails validation
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e

    try:
        experiment = ExperimentFile.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid config file {path}:\n{e}") from e

    logger.info(f"Loaded experiment config from {path}")
    return experiment
