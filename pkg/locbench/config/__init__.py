"""
Configuration package for locbench.
"""

from locbench.config.system_config import config, SystemConfig, LoggingConfig, PathConfig, BenchConfig
from locbench.config.experiment_config import ExperimentFile, load_experiment_file

__all__ = [
    'config',
    'SystemConfig',
    'LoggingConfig',
    'PathConfig',
    'BenchConfig',
    'ExperimentFile',
    'load_experiment_file',
]
