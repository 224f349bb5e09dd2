"""
Shared fixtures for the locbench test suite.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from locbench.services.model import MeasurementSet, Position2D, SignalParams, make_ring_scenario  # noqa: E402
from locbench.services.model import SPEED_OF_LIGHT  # noqa: E402
from locbench.services.objective import ObjectiveContext  # noqa: E402


@pytest.fixture
def quiet_signal():
    """Signal parameters with both noise levels at zero."""
    return SignalParams(sigma_rss=0.0, sigma_toa=0.0)


@pytest.fixture
def ring_100(quiet_signal):
    return make_ring_scenario(Position2D(0.0, 0.0), 100.0, 4, quiet_signal)


def random_context(rng: np.random.Generator, n_receivers: int = 4,
                   residual_units: str = "meters", beta: float = 3.0) -> ObjectiveContext:
    """Random receivers in a 400 m box with plausible RSS and TOA values."""
    receivers = [Position2D(*rng.uniform(-200.0, 200.0, size=2)) for _ in range(n_receivers)]
    rss = rng.uniform(-110.0, -60.0, size=n_receivers)
    ranges = rng.uniform(50.0, 400.0, size=n_receivers) + 1349.0
    toa = ranges / SPEED_OF_LIGHT
    return ObjectiveContext(
        receivers=receivers,
        measurements=MeasurementSet(rss=rss.tolist(), toa=toa.tolist()),
        beta=beta,
        residual_units=residual_units,
    )
