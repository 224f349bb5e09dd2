"""
Domain services: measurement model, objective, solvers and the benchmark harness.
"""

from .model import Position2D, SignalParams, Scenario, MeasurementSet, make_ring_scenario, sample_measurements
from .objective import ParamVector, ObjectiveContext, cost, cost_gradient, truth_params
from .optim import GridSpec, GdConfig, PsoConfig, SolveResult, grid_search, gradient_descent, pso
from .bench import ExperimentConfig, ExperimentReport, SolverSuite, run_trial, run_experiment

__all__ = [
    'Position2D',
    'SignalParams',
    'Scenario',
    'MeasurementSet',
    'make_ring_scenario',
    'sample_measurements',
    'ParamVector',
    'ObjectiveContext',
    'cost',
    'cost_gradient',
    'truth_params',
    'GridSpec',
    'GdConfig',
    'PsoConfig',
    'SolveResult',
    'grid_search',
    'gradient_descent',
    'pso',
    'ExperimentConfig',
    'ExperimentReport',
    'SolverSuite',
    'run_trial',
    'run_experiment',
]
