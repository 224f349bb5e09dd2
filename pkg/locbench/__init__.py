"""
locbench: RSS/TOA target localization solvers and benchmark harness.
"""

__version__ = "0.1.0"
