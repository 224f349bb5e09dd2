"""
Measurement model for RSS/TOA target localization.

RSS follows the log-normal path-loss model and TOA is the propagation delay
plus the target's clock bias. Both carry zero-mean Gaussian noise.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Dict, Any

import numpy as np

from locbench.services.errors import DegenerateGeometryError, InvalidParameterError

logger = logging.getLogger(__name__)

# Speed of light (m/s), exact by SI definition
SPEED_OF_LIGHT = 299_792_458.0

# Distances below this are treated as coincident points
D_MIN = 1e-3

# Reference distance of the path-loss model (m)
REFERENCE_DISTANCE = 1.0


def _require_finite(name: str, *values: float) -> None:
    for value in values:
        if not math.isfinite(value):
            raise InvalidParameterError(f"{name} must be finite, got {value!r}")


def _require_seed(seed: int) -> None:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise InvalidParameterError(f"seed must be a non-negative integer, got {seed!r}")


@dataclass(frozen=True)
class Position2D:
    """A point in the plane, meters."""
    x: float
    y: float

    def __post_init__(self):
        _require_finite("Position2D", self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def to_dict(self) -> Dict[str, float]:
        return {"x": self.x, "y": self.y}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Position2D':
        return cls(x=float(data["x"]), y=float(data["y"]))


@dataclass(frozen=True)
class SignalParams:
    """
    Signal parameters of a synthetic scenario.

    The noise levels and beta are simulation defaults, not field values.
    tau_true = 4.5 us puts the range bias near 1349 m, next to the 1350 m
    initial guess used for gradient descent.
    """
    p0_true: float = -58.5
    beta: float = 3.0
    d0: float = REFERENCE_DISTANCE
    sigma_rss: float = 6.0
    sigma_toa: float = 1.0e-7
    tau_true: float = 4.5e-6

    def __post_init__(self):
        _require_finite("SignalParams", self.p0_true, self.beta, self.d0,
                        self.sigma_rss, self.sigma_toa, self.tau_true)
        if self.beta <= 0:
            raise InvalidParameterError(f"beta must be positive, got {self.beta}")
        if self.d0 != REFERENCE_DISTANCE:
            raise InvalidParameterError(f"d0 is fixed at {REFERENCE_DISTANCE} m, got {self.d0}")
        if self.sigma_rss < 0 or self.sigma_toa < 0:
            raise InvalidParameterError("noise standard deviations must be non-negative")

    @property
    def range_bias(self) -> float:
        """Clock bias expressed as a distance, c * tau (m)."""
        return SPEED_OF_LIGHT * self.tau_true

    def to_dict(self) -> Dict[str, float]:
        return {
            "p0_true": self.p0_true,
            "beta": self.beta,
            "d0": self.d0,
            "sigma_rss": self.sigma_rss,
            "sigma_toa": self.sigma_toa,
            "tau_true": self.tau_true,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SignalParams':
        return cls(**{key: float(value) for key, value in data.items()})


@dataclass(frozen=True)
class Scenario:
    """Target truth, receiver layout and signal parameters."""
    target: Position2D
    receivers: Tuple[Position2D, ...]
    signal: SignalParams = field(default_factory=SignalParams)

    def __post_init__(self):
        # Accept any sequence but store a tuple
        object.__setattr__(self, "receivers", tuple(self.receivers))
        if len(self.receivers) < 1:
            raise InvalidParameterError("a scenario needs at least one receiver")

        for i, rx in enumerate(self.receivers):
            if distance(self.target, rx) < D_MIN:
                raise DegenerateGeometryError(
                    f"receiver {i} at ({rx.x}, {rx.y}) coincides with the target"
                )
            for j in range(i):
                if distance(rx, self.receivers[j]) < D_MIN:
                    raise InvalidParameterError(f"receivers {j} and {i} coincide")

    @property
    def n_receivers(self) -> int:
        return len(self.receivers)

    def receiver_array(self) -> np.ndarray:
        """Receiver positions as an (N, 2) array."""
        return np.array([[rx.x, rx.y] for rx in self.receivers], dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": self.target.to_dict(),
            "receivers": [rx.to_dict() for rx in self.receivers],
            "signal": self.signal.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Scenario':
        return cls(
            target=Position2D.from_dict(data["target"]),
            receivers=tuple(Position2D.from_dict(rx) for rx in data["receivers"]),
            signal=SignalParams.from_dict(data.get("signal", {})),
        )


@dataclass(frozen=True)
class MeasurementSet:
    """Per-receiver RSS (dBm) and TOA (s), aligned with the receiver list."""
    rss: Tuple[float, ...]
    toa: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rss", tuple(float(v) for v in self.rss))
        object.__setattr__(self, "toa", tuple(float(v) for v in self.toa))
        if len(self.rss) != len(self.toa):
            raise InvalidParameterError(
                f"rss and toa lengths differ ({len(self.rss)} vs {len(self.toa)})"
            )
        _require_finite("MeasurementSet.rss", *self.rss)
        _require_finite("MeasurementSet.toa", *self.toa)

    def __len__(self) -> int:
        return len(self.rss)

    def permuted(self, order: Sequence[int]) -> 'MeasurementSet':
        return MeasurementSet(rss=[self.rss[i] for i in order], toa=[self.toa[i] for i in order])

    def to_dict(self) -> Dict[str, List[float]]:
        return {"rss": list(self.rss), "toa": list(self.toa)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MeasurementSet':
        return cls(rss=data["rss"], toa=data["toa"])


# ============================================================
# Measurement model
# ============================================================

def distance(a: Position2D, b: Position2D) -> float:
    """Euclidean distance between two points (m)."""
    return math.hypot(a.x - b.x, a.y - b.y)


def rss_mean(target: Position2D, rx: Position2D, p0: float, beta: float,
             d0: float = REFERENCE_DISTANCE) -> float:
    """
    Noise-free RSS at a receiver (dBm).

    Args:
        target: Emitter position
        rx: Receiver position
        p0: Power at the reference distance (dBm)
        beta: Path-loss exponent
        d0: Reference distance (m)

    Returns:
        p0 - 10 * beta * log10(d / d0)
    """
    d = distance(target, rx)
    if d < D_MIN:
        raise DegenerateGeometryError(f"target-receiver distance {d} m is below {D_MIN} m")
    return p0 - 10.0 * beta * math.log10(d / d0)


def toa_mean(target: Position2D, rx: Position2D, tau: float) -> float:
    """Noise-free time of arrival, d / c + tau (s)."""
    return distance(target, rx) / SPEED_OF_LIGHT + tau


def sample_measurements(scenario: Scenario, seed: int) -> MeasurementSet:
    """
    Draw one noisy measurement set for a scenario.

    RSS noise is drawn for every receiver first, then TOA noise, from a
    generator seeded with `seed`; the same seed always yields the same set.
    """
    _require_seed(seed)
    signal = scenario.signal
    rss_means = np.array([
        rss_mean(scenario.target, rx, signal.p0_true, signal.beta, signal.d0)
        for rx in scenario.receivers
    ])
    toa_means = np.array([
        toa_mean(scenario.target, rx, signal.tau_true) for rx in scenario.receivers
    ])

    rng = np.random.default_rng(seed)
    rss = rng.normal(loc=rss_means, scale=signal.sigma_rss)
    toa = rng.normal(loc=toa_means, scale=signal.sigma_toa)
    return MeasurementSet(rss=rss.tolist(), toa=toa.tolist())


# ============================================================
# Receiver geometries
# ============================================================

def make_ring_scenario(target: Position2D, radius: float, n_receivers: int,
                       signal: SignalParams) -> Scenario:
    """
    Place receivers evenly on a circle around the target.

    Receiver k sits at angle 2*pi*k/n, starting at angle 0.
    """
    if not math.isfinite(radius) or radius <= 0:
        raise InvalidParameterError(f"radius must be positive, got {radius}")
    if n_receivers < 1:
        raise InvalidParameterError(f"n_receivers must be at least 1, got {n_receivers}")

    receivers = []
    for k in range(n_receivers):
        angle = 2.0 * math.pi * k / n_receivers
        receivers.append(Position2D(
            x=target.x + radius * math.cos(angle),
            y=target.y + radius * math.sin(angle),
        ))
    return Scenario(target=target, receivers=tuple(receivers), signal=signal)


def make_multi_radius_scenario(target: Position2D, radii: Sequence[float],
                               signal: SignalParams) -> Scenario:
    """
    Place one receiver per radius, evenly spread in angle.

    Receiver k sits at angle 2*pi*k/n at distance radii[k] from the target.
    """
    if len(radii) < 1:
        raise InvalidParameterError("at least one radius is required")
    receivers = []
    n = len(radii)
    for k, radius in enumerate(radii):
        if not math.isfinite(radius) or radius <= 0:
            raise InvalidParameterError(f"radius must be positive, got {radius}")
        angle = 2.0 * math.pi * k / n
        receivers.append(Position2D(
            x=target.x + radius * math.cos(angle),
            y=target.y + radius * math.sin(angle),
        ))
    return Scenario(target=target, receivers=tuple(receivers), signal=signal)
