"""
Maximum-likelihood cost for hybrid RSS/TOA localization.

The unknown vector is theta = [x, y, p0, b] where b = c * tau is the target's
clock bias expressed in meters. The cost is

    F(theta) = sum_i (P_i - p0 + 10 beta log10 d_i)^2 + w_i (T_i - d_i/c - tau)^2

evaluated with the TOA residual in meters, c*T_i - d_i - b, and the weight
scaled by 1/c^2, which is the same value as the seconds form.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from locbench.services.errors import DegenerateGeometryError, InvalidParameterError
from locbench.services.model import (
    D_MIN,
    REFERENCE_DISTANCE,
    SPEED_OF_LIGHT,
    MeasurementSet,
    Position2D,
    Scenario,
)

logger = logging.getLogger(__name__)

RESIDUAL_UNITS = ("seconds", "meters")

# Affine TOA weighting factor, w = 4e-5 d - 1e-3, clamped at zero (root at 25 m)
WEIGHT_SLOPE = 4e-5
WEIGHT_OFFSET = 1e-3

LN10 = math.log(10.0)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ParamVector:
    """Unknowns of the estimator: position (m), p0 (dBm), range bias b (m)."""
    x: float
    y: float
    p0: float
    b: float

    def __post_init__(self):
        for name in ("x", "y", "p0", "b"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidParameterError(f"ParamVector.{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def tau(self) -> float:
        """Clock bias in seconds."""
        return self.b / SPEED_OF_LIGHT

    @property
    def position(self) -> Position2D:
        return Position2D(self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.p0, self.b], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'ParamVector':
        if len(values) != 4:
            raise InvalidParameterError(f"expected 4 values, got {len(values)}")
        return cls(float(values[0]), float(values[1]), float(values[2]), float(values[3]))

    @classmethod
    def from_tau(cls, x: float, y: float, p0: float, tau: float) -> 'ParamVector':
        return cls(x, y, p0, tau * SPEED_OF_LIGHT)


@dataclass(frozen=True, eq=False)
class ObjectiveContext:
    """
    Everything the cost needs besides theta.

    residual_units selects how the TOA weight is applied: "seconds" keeps the
    weighting factor on the seconds residual (scaled by 1/c^2 on the meter
    residual), "meters" applies it to the meter residual directly.
    """
    receivers: Tuple[Position2D, ...]
    measurements: MeasurementSet
    beta: float
    d0: float = REFERENCE_DISTANCE
    residual_units: str = "seconds"

    _rx: Tuple[Tuple[float, float], ...] = field(init=False, repr=False)
    _rss: Tuple[float, ...] = field(init=False, repr=False)
    _range: Tuple[float, ...] = field(init=False, repr=False)
    _ten_beta: float = field(init=False, repr=False)
    _weight_scale: float = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "receivers", tuple(self.receivers))
        if len(self.receivers) != len(self.measurements):
            raise InvalidParameterError(
                f"{len(self.receivers)} receivers but {len(self.measurements)} measurements"
            )
        if len(self.receivers) < 1:
            raise InvalidParameterError("at least one receiver is required")
        if not self.beta > 0:
            raise InvalidParameterError(f"beta must be positive, got {self.beta}")
        if self.residual_units not in RESIDUAL_UNITS:
            raise InvalidParameterError(
                f"residual_units must be one of {RESIDUAL_UNITS}, got {self.residual_units!r}"
            )

        object.__setattr__(self, "_rx", tuple((rx.x, rx.y) for rx in self.receivers))
        object.__setattr__(self, "_rss", tuple(self.measurements.rss))
        object.__setattr__(self, "_range", tuple(SPEED_OF_LIGHT * t for t in self.measurements.toa))
        object.__setattr__(self, "_ten_beta", 10.0 * self.beta)
        scale = 1.0 / (SPEED_OF_LIGHT * SPEED_OF_LIGHT) if self.residual_units == "seconds" else 1.0
        object.__setattr__(self, "_weight_scale", scale)

    @classmethod
    def from_scenario(cls, scenario: Scenario, measurements: MeasurementSet,
                      residual_units: str = "seconds") -> 'ObjectiveContext':
        return cls(
            receivers=scenario.receivers,
            measurements=measurements,
            beta=scenario.signal.beta,
            d0=scenario.signal.d0,
            residual_units=residual_units,
        )

    @property
    def n_receivers(self) -> int:
        return len(self.receivers)

    def permuted(self, order: Sequence[int]) -> 'ObjectiveContext':
        """Same context with receivers (and their measurements) reordered."""
        return ObjectiveContext(
            receivers=tuple(self.receivers[i] for i in order),
            measurements=self.measurements.permuted(order),
            beta=self.beta,
            d0=self.d0,
            residual_units=self.residual_units,
        )

    def is_feasible(self, x: float, y: float) -> bool:
        """True when the candidate position keeps every d_i >= D_MIN."""
        return all(math.hypot(x - rx, y - ry) >= D_MIN for rx, ry in self._rx)

    def effective_weight(self, d: float) -> float:
        """TOA weight as applied to the meter residual."""
        return self._weight_scale * weight(d)


def truth_params(scenario: Scenario) -> ParamVector:
    """The true parameter vector of a synthetic scenario."""
    return ParamVector(
        x=scenario.target.x,
        y=scenario.target.y,
        p0=scenario.signal.p0_true,
        b=scenario.signal.range_bias,
    )


def weight(d: float) -> float:
    """TOA weighting factor for a distance d (m), clamped at zero below 25 m."""
    return max(WEIGHT_SLOPE * d - WEIGHT_OFFSET, 0.0)


def _distance_to(ctx: ObjectiveContext, i: int, x: float, y: float) -> Tuple[float, float, float]:
    rx, ry = ctx._rx[i]
    dx = x - rx
    dy = y - ry
    d = math.hypot(dx, dy)
    if d < D_MIN:
        raise DegenerateGeometryError(
            f"candidate ({x}, {y}) is {d} m from receiver {i}, below {D_MIN} m"
        )
    return dx, dy, d


def evaluate_block(ctx: ObjectiveContext, x: float, y: float,
                   p0: ArrayLike, b: ArrayLike) -> ArrayLike:
    """
    Cost at one candidate position for scalar or broadcastable p0 / b.

    Distances depend only on (x, y), so every transcendental is evaluated on
    scalars and the per-element arithmetic is the same whether p0 and b are
    floats or arrays. Grid search relies on this to agree bit-for-bit with
    `cost`.
    """
    x = float(x)
    y = float(y)
    total: ArrayLike = 0.0
    for i in range(len(ctx._rx)):
        _, _, d = _distance_to(ctx, i, x, y)
        rss_residual = (ctx._rss[i] - p0) + ctx._ten_beta * math.log10(d / ctx.d0)
        toa_residual = (ctx._range[i] - d) - b
        w = ctx.effective_weight(d)
        total = total + (rss_residual * rss_residual + w * (toa_residual * toa_residual))
    return total


def cost(theta: ParamVector, ctx: ObjectiveContext) -> float:
    """
    Weighted least-squares cost of a candidate.

    Raises:
        DegenerateGeometryError: if the candidate is within D_MIN of a receiver
    """
    return float(evaluate_block(ctx, theta.x, theta.y, theta.p0, theta.b))


def cost_gradient(theta: ParamVector, ctx: ObjectiveContext) -> np.ndarray:
    """
    Analytic gradient [dF/dx, dF/dy, dF/dp0, dF/db].

    The TOA weight is frozen at its value for the current distances; its own
    dependence on d_i is not differentiated.
    """
    gx = gy = gp0 = gb = 0.0
    for i in range(len(ctx._rx)):
        dx, dy, d = _distance_to(ctx, i, theta.x, theta.y)
        ux = dx / d
        uy = dy / d
        rss_residual = (ctx._rss[i] - theta.p0) + ctx._ten_beta * math.log10(d / ctx.d0)
        toa_residual = (ctx._range[i] - d) - theta.b
        w = ctx.effective_weight(d)

        radial = 2.0 * rss_residual * ctx._ten_beta / (d * LN10) - 2.0 * w * toa_residual
        gx += radial * ux
        gy += radial * uy
        gp0 -= 2.0 * rss_residual
        gb -= 2.0 * w * toa_residual
    return np.array([gx, gy, gp0, gb], dtype=float)
