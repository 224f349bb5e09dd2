"""
Cost function and analytic gradient.
"""

import math

import numpy as np
import pytest

from conftest import random_context
from locbench.services.errors import DegenerateGeometryError, InvalidParameterError
from locbench.services.model import SPEED_OF_LIGHT, MeasurementSet, Position2D, sample_measurements
from locbench.services.objective import (
    ObjectiveContext,
    ParamVector,
    cost,
    cost_gradient,
    evaluate_block,
    truth_params,
    weight,
)


def reference_cost(theta: ParamVector, ctx: ObjectiveContext) -> float:
    """Term-by-term cost written directly from the measurement model."""
    total = 0.0
    for rx, p, t in zip(ctx.receivers, ctx.measurements.rss, ctx.measurements.toa):
        d = math.hypot(theta.x - rx.x, theta.y - rx.y)
        rss_term = (p - theta.p0 + 10.0 * ctx.beta * math.log10(d)) ** 2
        if ctx.residual_units == "seconds":
            toa_term = weight(d) * (t - d / SPEED_OF_LIGHT - theta.b / SPEED_OF_LIGHT) ** 2
        else:
            toa_term = weight(d) * (SPEED_OF_LIGHT * t - d - theta.b) ** 2
        total += rss_term + toa_term
    return total


def frozen_weight_cost(values: np.ndarray, ctx: ObjectiveContext, weights) -> float:
    """Cost with the effective TOA weights held fixed, applied to the meter residual."""
    x, y, p0, b = values
    total = 0.0
    for rx, p, t, w in zip(ctx.receivers, ctx.measurements.rss, ctx.measurements.toa, weights):
        d = math.hypot(x - rx.x, y - rx.y)
        total += (p - p0 + 10.0 * ctx.beta * math.log10(d)) ** 2
        total += w * (SPEED_OF_LIGHT * t - d - b) ** 2
    return total


def random_theta(rng: np.random.Generator, ctx: ObjectiveContext, min_distance: float = 5.0) -> ParamVector:
    while True:
        x, y = rng.uniform(-250.0, 250.0, size=2)
        if all(math.hypot(x - rx.x, y - rx.y) > min_distance for rx in ctx.receivers):
            return ParamVector(x, y, rng.uniform(-70.0, -50.0), rng.uniform(1300.0, 1400.0))


class TestWeight:

    @pytest.mark.parametrize("d, expected", [
        (0.0, 0.0),
        (10.0, 0.0),
        (25.0, 0.0),
        (50.0, 1e-3),
        (100.0, 3e-3),
        (1000.0, 0.039),
    ])
    def test_values(self, d, expected):
        assert weight(d) == pytest.approx(expected, abs=1e-15)

    def test_never_negative(self):
        assert all(weight(d) >= 0.0 for d in np.linspace(0.0, 30.0, 301))


class TestParamVector:

    def test_tau_conversion(self):
        theta = ParamVector.from_tau(1.0, 2.0, -60.0, 4.5e-6)
        assert theta.b == pytest.approx(1349.066061)
        assert theta.tau == pytest.approx(4.5e-6, rel=1e-15)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidParameterError):
            ParamVector(0.0, float("inf"), -60.0, 0.0)

    def test_array_roundtrip(self):
        theta = ParamVector(1.5, -2.5, -58.5, 1349.0)
        assert ParamVector.from_array(theta.as_array()) == theta


class TestCost:

    def test_matches_reference_in_seconds_units(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            ctx = random_context(rng, residual_units="seconds")
            theta = random_theta(rng, ctx)
            assert cost(theta, ctx) == pytest.approx(reference_cost(theta, ctx), rel=1e-9)

    def test_matches_reference_in_meter_units(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            ctx = random_context(rng, residual_units="meters")
            theta = random_theta(rng, ctx)
            assert cost(theta, ctx) == pytest.approx(reference_cost(theta, ctx), rel=1e-9)

    def test_zero_at_truth_without_noise(self, ring_100):
        m = sample_measurements(ring_100, 0)
        ctx = ObjectiveContext.from_scenario(ring_100, m)
        assert cost(truth_params(ring_100), ctx) == pytest.approx(0.0, abs=1e-12)

    def test_non_negative(self):
        rng = np.random.default_rng(13)
        ctx = random_context(rng)
        assert all(cost(random_theta(rng, ctx), ctx) >= 0.0 for _ in range(100))

    def test_candidate_on_receiver(self, ring_100):
        ctx = ObjectiveContext.from_scenario(ring_100, sample_measurements(ring_100, 0))
        rx = ring_100.receivers[2]
        with pytest.raises(DegenerateGeometryError):
            cost(ParamVector(rx.x, rx.y, -60.0, 1350.0), ctx)

    def test_receiver_order_does_not_matter(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            ctx = random_context(rng, n_receivers=5)
            theta = random_theta(rng, ctx)
            shuffled = ctx.permuted(rng.permutation(5).tolist())
            assert cost(theta, shuffled) == pytest.approx(cost(theta, ctx), rel=1e-12)

    def test_translation_invariance(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            ctx = random_context(rng)
            theta = random_theta(rng, ctx)
            dx, dy = rng.uniform(-1000.0, 1000.0, size=2)
            moved = ObjectiveContext(
                receivers=[Position2D(rx.x + dx, rx.y + dy) for rx in ctx.receivers],
                measurements=ctx.measurements,
                beta=ctx.beta,
                residual_units=ctx.residual_units,
            )
            moved_theta = ParamVector(theta.x + dx, theta.y + dy, theta.p0, theta.b)
            assert cost(moved_theta, moved) == pytest.approx(cost(theta, ctx), rel=1e-9)

    def test_sum_over_receivers(self):
        rng = np.random.default_rng(16)
        ctx = random_context(rng, n_receivers=6)
        theta = random_theta(rng, ctx)
        parts = [
            cost(theta, ObjectiveContext(
                receivers=[ctx.receivers[i]],
                measurements=MeasurementSet([ctx.measurements.rss[i]], [ctx.measurements.toa[i]]),
                beta=ctx.beta,
                residual_units=ctx.residual_units,
            ))
            for i in range(6)
        ]
        assert cost(theta, ctx) == pytest.approx(sum(parts), rel=1e-12)

    def test_block_matches_scalar_cost_exactly(self):
        rng = np.random.default_rng(17)
        ctx = random_context(rng, residual_units="seconds")
        theta = random_theta(rng, ctx)
        p0s = theta.p0 + 0.5 * np.arange(-3, 4)
        bs = theta.b + 5.0 * np.arange(-2, 3)
        block = evaluate_block(ctx, theta.x, theta.y, p0s[:, None], bs[None, :])
        assert block.shape == (7, 5)
        for i, p0 in enumerate(p0s):
            for j, b in enumerate(bs):
                assert block[i, j] == cost(ParamVector(theta.x, theta.y, p0, b), ctx)

    def test_context_rejects_mismatched_lengths(self, ring_100):
        with pytest.raises(InvalidParameterError):
            ObjectiveContext(ring_100.receivers, MeasurementSet([-80.0], [4.5e-6]), beta=3.0)

    def test_context_rejects_unknown_units(self, ring_100):
        with pytest.raises(InvalidParameterError):
            ObjectiveContext.from_scenario(ring_100, sample_measurements(ring_100, 0), "feet")


class TestGradient:

    @pytest.mark.parametrize("residual_units", ["seconds", "meters"])
    def test_matches_central_differences(self, residual_units):
        """Analytic gradient against central differences of the frozen-weight cost."""
        rng = np.random.default_rng(21)
        h = 1e-5
        for _ in range(100):
            ctx = random_context(rng, residual_units=residual_units)
            theta = random_theta(rng, ctx)
            weights = [ctx.effective_weight(math.hypot(theta.x - rx.x, theta.y - rx.y))
                       for rx in ctx.receivers]
            base = theta.as_array()
            numeric = np.zeros(4)
            for k in range(4):
                step = np.zeros(4)
                step[k] = h
                numeric[k] = (frozen_weight_cost(base + step, ctx, weights)
                              - frozen_weight_cost(base - step, ctx, weights)) / (2 * h)
            # floor scaled to the gradient for components lost in rounding (b in seconds units)
            floor = 1e-8 * np.linalg.norm(numeric)
            np.testing.assert_allclose(cost_gradient(theta, ctx), numeric, rtol=1e-5, atol=floor)

    def test_p0_component_in_seconds_units(self):
        rng = np.random.default_rng(22)
        ctx = random_context(rng, residual_units="seconds")
        theta = random_theta(rng, ctx)
        h = 1e-4
        up = ParamVector(theta.x, theta.y, theta.p0 + h, theta.b)
        down = ParamVector(theta.x, theta.y, theta.p0 - h, theta.b)
        numeric = (cost(up, ctx) - cost(down, ctx)) / (2 * h)
        assert cost_gradient(theta, ctx)[2] == pytest.approx(numeric, rel=1e-6, abs=1e-5)

    def test_vanishes_at_truth_without_noise(self, ring_100):
        ctx = ObjectiveContext.from_scenario(ring_100, sample_measurements(ring_100, 0), "meters")
        gradient = cost_gradient(truth_params(ring_100), ctx)
        np.testing.assert_allclose(gradient, 0.0, atol=1e-9)

    def test_rejects_candidate_on_receiver(self, ring_100):
        ctx = ObjectiveContext.from_scenario(ring_100, sample_measurements(ring_100, 0))
        rx = ring_100.receivers[0]
        with pytest.raises(DegenerateGeometryError):
            cost_gradient(ParamVector(rx.x, rx.y, -60.0, 1350.0), ctx)
