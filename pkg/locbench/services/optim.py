"""
Numerical solvers for the localization cost: exhaustive grid search,
fixed-rate gradient descent and particle swarm optimization.

Each solver is single-threaded and deterministic for a given configuration.
"""

import math
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from locbench.services.errors import (
    DegenerateGeometryError,
    DivergenceError,
    EmptyGridError,
    InfeasibleError,
    InvalidParameterError,
)
from locbench.services.objective import (
    ObjectiveContext,
    ParamVector,
    cost,
    cost_gradient,
    evaluate_block,
)

logger = logging.getLogger(__name__)

SOLVER_NAMES = ("grid", "gd", "pso")

# Initial guess offsets used for gradient descent in the field campaign
OFFSET_INIT_DX = -20.0
OFFSET_INIT_DY = -20.0
OFFSET_INIT_P0 = -60.0
OFFSET_INIT_B = 1350.0


# ============================================================
# Solver configurations
# ============================================================

@dataclass(frozen=True)
class GridSpec:
    """
    Search box and step per coordinate (x, y, p0, b).

    Axes run symmetrically around the center: center + k * interval for
    |k| <= floor(half_span / interval). Validity is checked by grid_search.
    """
    center: ParamVector
    half_span: Tuple[float, float, float, float]
    interval: Tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "half_span", tuple(float(v) for v in self.half_span))
        object.__setattr__(self, "interval", tuple(float(v) for v in self.interval))
        if len(self.half_span) != 4 or len(self.interval) != 4:
            raise InvalidParameterError("half_span and interval need one value per coordinate")

    @property
    def lower(self) -> np.ndarray:
        return self.center.as_array() - np.array(self.half_span)

    @property
    def upper(self) -> np.ndarray:
        return self.center.as_array() + np.array(self.half_span)


@dataclass(frozen=True)
class GdConfig:
    """Gradient descent settings."""
    init: ParamVector
    gamma: float = 0.001
    max_iters: int = 200
    grad_tol: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidParameterError(f"gamma must be positive, got {self.gamma}")
        if self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.grad_tol is not None and not self.grad_tol >= 0:
            raise InvalidParameterError(f"grad_tol must be non-negative, got {self.grad_tol}")


@dataclass(frozen=True)
class PsoConfig:
    """Particle swarm settings; bounds are inclusive boxes on (x, y, p0, b)."""
    lower: ParamVector
    upper: ParamVector
    max_iters: int = 200
    swarm_size: int = 100
    inertia: float = 0.8
    c1: float = 0.1
    c2: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not np.all(self.lower.as_array() < self.upper.as_array()):
            raise InvalidParameterError(f"lower bounds {self.lower} must be below upper bounds {self.upper}")
        if self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.swarm_size < 1:
            raise InvalidParameterError(f"swarm_size must be at least 1, got {self.swarm_size}")
        if self.seed < 0:
            raise InvalidParameterError(f"seed must be non-negative, got {self.seed}")


@dataclass
class SolveResult:
    """Outcome of one solver run."""
    solver: str
    estimate: ParamVector
    cost: float
    evaluations: int
    trajectory: Optional[List[Tuple[int, float]]] = None


# ============================================================
# Grid search
# ============================================================

def grid_axes(spec: GridSpec) -> List[np.ndarray]:
    """Axis values for x, y, p0 and b, in scan order."""
    axes = []
    for name, center, half_span, interval in zip(
        ("x", "y", "p0", "b"), spec.center.as_array(), spec.half_span, spec.interval
    ):
        if not (math.isfinite(half_span) and math.isfinite(interval)):
            raise EmptyGridError(f"{name} axis has a non-finite span or interval")
        if interval <= 0 or half_span <= 0:
            raise EmptyGridError(
                f"{name} axis is empty (half_span={half_span}, interval={interval})"
            )
        k = int(math.floor(half_span / interval + 1e-9))
        axes.append(center + interval * np.arange(-k, k + 1, dtype=float))
    return axes


def grid_search(ctx: ObjectiveContext, spec: GridSpec) -> SolveResult:
    """
    Evaluate every grid point and return the cheapest.

    Scan order is x outermost, then y, p0, b; on ties the first point in scan
    order wins. Positions within D_MIN of a receiver are skipped.

    Raises:
        EmptyGridError: if an axis has no points
        InfeasibleError: if every grid point is skipped
    """
    xs, ys, p0s, bs = grid_axes(spec)
    p0_col = p0s[:, None]
    b_row = bs[None, :]
    total_points = xs.size * ys.size * p0s.size * bs.size
    logger.debug(f"Grid search over {xs.size}x{ys.size}x{p0s.size}x{bs.size} = {total_points} points")

    best_cost = math.inf
    best_index: Optional[Tuple[int, int, int, int]] = None
    evaluations = 0

    for ix, x in enumerate(xs):
        for iy, y in enumerate(ys):
            if not ctx.is_feasible(x, y):
                continue
            block = evaluate_block(ctx, x, y, p0_col, b_row)
            evaluations += block.size
            j = int(np.argmin(block))
            value = float(block.flat[j])
            if value < best_cost:
                best_cost = value
                ip, ib = divmod(j, bs.size)
                best_index = (ix, iy, ip, ib)

    if best_index is None:
        raise InfeasibleError("every grid point lies on a receiver")

    ix, iy, ip, ib = best_index
    estimate = ParamVector(xs[ix], ys[iy], p0s[ip], bs[ib])
    logger.debug(f"Grid search finished: cost={best_cost:.6g}, evaluations={evaluations}")
    return SolveResult("grid", estimate, best_cost, evaluations)


# ============================================================
# Gradient descent
# ============================================================

def gradient_descent(ctx: ObjectiveContext, cfg: GdConfig) -> SolveResult:
    """
    Fixed learning rate descent, theta_{k+1} = theta_k - gamma * grad F(theta_k).

    Runs max_iters steps, or stops early once the gradient norm drops below
    grad_tol. Returns the lowest-cost iterate visited, which is not always
    the last one.

    Raises:
        DivergenceError: if an iterate or its cost becomes non-finite
    """
    theta = cfg.init.as_array()
    current = cfg.init
    current_cost = cost(current, ctx)
    best, best_cost = current, current_cost
    trajectory = [(0, current_cost)]
    evaluations = 1

    for k in range(1, cfg.max_iters + 1):
        gradient = cost_gradient(current, ctx)
        if cfg.grad_tol is not None and float(np.linalg.norm(gradient)) < cfg.grad_tol:
            logger.debug(f"Gradient descent converged after {k - 1} iterations")
            break

        theta = theta - cfg.gamma * gradient
        if not np.all(np.isfinite(theta)):
            raise DivergenceError(f"iterate {k} is not finite; learning rate {cfg.gamma} too large?")
        current = ParamVector.from_array(theta)
        current_cost = cost(current, ctx)
        evaluations += 1
        if not math.isfinite(current_cost):
            raise DivergenceError(f"cost at iterate {k} is not finite; learning rate {cfg.gamma} too large?")

        trajectory.append((k, current_cost))
        if current_cost < best_cost:
            best, best_cost = current, current_cost

    return SolveResult("gd", best, best_cost, evaluations, trajectory)


# ============================================================
# Particle swarm optimization
# ============================================================

def _cost_or_inf(theta: np.ndarray, ctx: ObjectiveContext) -> float:
    try:
        return cost(ParamVector.from_array(theta), ctx)
    except DegenerateGeometryError:
        return math.inf


def pso(ctx: ObjectiveContext, cfg: PsoConfig) -> SolveResult:
    """
    Global-best particle swarm.

    Particles are updated one after another; a particle that improves the
    global best is visible to the particles that follow it in the same
    iteration. r1 and r2 are scalars drawn per particle per iteration, and
    positions are clamped to the bounds after each move.

    Raises:
        InfeasibleError: if no initial particle is a valid candidate
    """
    lower = cfg.lower.as_array()
    upper = cfg.upper.as_array()
    half_width = (upper - lower) / 2.0
    rng = np.random.default_rng(cfg.seed)

    positions = rng.uniform(lower, upper, size=(cfg.swarm_size, 4))
    velocities = rng.uniform(-half_width, half_width, size=(cfg.swarm_size, 4))

    personal = positions.copy()
    personal_cost = np.array([_cost_or_inf(p, ctx) for p in positions])
    if not np.any(np.isfinite(personal_cost)):
        raise InfeasibleError("no initial particle is a valid candidate; check the PSO bounds")

    best_index = int(np.argmin(personal_cost))
    best = personal[best_index].copy()
    best_cost = float(personal_cost[best_index])
    trajectory = [(0, best_cost)]

    for iteration in range(1, cfg.max_iters + 1):
        for i in range(cfg.swarm_size):
            r1, r2 = rng.random(2)
            velocities[i] = (
                cfg.inertia * velocities[i]
                + cfg.c1 * r1 * (personal[i] - positions[i])
                + cfg.c2 * r2 * (best - positions[i])
            )
            positions[i] = np.clip(positions[i] + velocities[i], lower, upper)

            candidate_cost = _cost_or_inf(positions[i], ctx)
            if candidate_cost < personal_cost[i]:
                personal[i] = positions[i]
                personal_cost[i] = candidate_cost
                if personal_cost[i] < best_cost:
                    best = personal[i].copy()
                    best_cost = float(personal_cost[i])
        trajectory.append((iteration, best_cost))

    evaluations = cfg.swarm_size * (cfg.max_iters + 1)
    return SolveResult("pso", ParamVector.from_array(best), best_cost, evaluations, trajectory)


# ============================================================
# Initializers and search-space helpers
# ============================================================

def offset_initializer(truth: ParamVector, dx: float = OFFSET_INIT_DX, dy: float = OFFSET_INIT_DY,
                       p0: float = OFFSET_INIT_P0, b: float = OFFSET_INIT_B) -> ParamVector:
    """Initial guess at a fixed offset from the true position, with absolute p0 and b."""
    return ParamVector(truth.x + dx, truth.y + dy, p0, b)


def coarse_grid_initializer(ctx: ObjectiveContext, center: ParamVector, half_span_xy: float,
                            points: int = 16) -> ParamVector:
    """
    Truth-free initial guess from a points x points position grid.

    p0 and b stay at the center's values; the first cheapest feasible
    position wins.
    """
    if points < 1:
        raise InvalidParameterError(f"points must be at least 1, got {points}")
    if not half_span_xy > 0:
        raise InvalidParameterError(f"half_span_xy must be positive, got {half_span_xy}")

    xs = np.linspace(center.x - half_span_xy, center.x + half_span_xy, points)
    ys = np.linspace(center.y - half_span_xy, center.y + half_span_xy, points)
    best: Optional[ParamVector] = None
    best_cost = math.inf
    for x in xs:
        for y in ys:
            if not ctx.is_feasible(x, y):
                continue
            candidate = ParamVector(x, y, center.p0, center.b)
            value = cost(candidate, ctx)
            if value < best_cost:
                best, best_cost = candidate, value
    if best is None:
        raise InfeasibleError("coarse initialization grid has no feasible point")
    return best


def build_grid_spec(center: ParamVector, radius: float, span_factor: float = 1.0,
                    xy_interval: float = 1.0, p0_half_span: float = 3.0, p0_interval: float = 0.5,
                    b_half_span: float = 25.0, b_interval: float = 5.0) -> GridSpec:
    """
    Grid sized from the target-receiver distance.

    With span_factor 1 the position box is twice the distance wide.
    """
    half_xy = span_factor * radius
    return GridSpec(
        center=center,
        half_span=(half_xy, half_xy, p0_half_span, b_half_span),
        interval=(xy_interval, xy_interval, p0_interval, b_interval),
    )


def pso_bounds(spec: GridSpec) -> Tuple[ParamVector, ParamVector]:
    """PSO box equal to the grid search space."""
    return ParamVector.from_array(spec.lower), ParamVector.from_array(spec.upper)
