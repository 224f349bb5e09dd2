"""
Solver Timing Comparison

Solves single noisy trials at field-campaign settings with all three
solvers and reports mean wall time, evaluation count and position error
per solver and radius.

Usage:
    python scripts/compare_timing.py [--radii 50 200] [--trials 3]
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))

from locbench.services.bench import SolverSuite, run_trial  # noqa: E402
from locbench.services.model import Position2D, SignalParams, make_ring_scenario  # noqa: E402


def time_radius(radius: float, trials: int, seed: int) -> Dict[str, Any]:
    """Mean time, evaluations and error per solver for one ring radius."""
    scenario = make_ring_scenario(Position2D(0.0, 0.0), radius, 4, SignalParams())
    suite = SolverSuite()

    # First call pays for imports and allocator warm-up
    run_trial(scenario, suite, seed, radius)

    per_solver: Dict[str, List] = {name: [] for name in suite.solvers}
    for t in range(trials):
        result = run_trial(scenario, suite, seed + t, radius, trial=t)
        for name, outcome in result.outcomes.items():
            if outcome.ok:
                per_solver[name].append((outcome.time_s, outcome.evaluations, outcome.error_m))

    rows = {}
    for name, samples in per_solver.items():
        if not samples:
            rows[name] = None
            continue
        times, evaluations, errors = (np.array(column, dtype=float) for column in zip(*samples))
        rows[name] = {
            "time_s": float(times.mean()),
            "evaluations": float(evaluations.mean()),
            "error_m": float(errors.mean()),
            "ok": len(samples),
        }
    return {"radius": radius, "trials": trials, "solvers": rows}


def print_timing_report(report: Dict[str, Any]) -> None:
    """Print timing results for one radius."""
    print(f"\n{'='*60}")
    print(f"RADIUS: {report['radius']:g} m ({report['trials']} trials)")
    print("=" * 60)
    for name, row in report["solvers"].items():
        if row is None:
            print(f"  {name:5s} every trial failed")
            continue
        print(f"  {name:5s} time={row['time_s']:.6f}s  evals={row['evaluations']:.0f}  "
              f"error={row['error_m']:.2f}m  ({row['ok']}/{report['trials']} ok)")


def main():
    parser = argparse.ArgumentParser(description="Compare solver wall time at field-campaign settings")
    parser.add_argument("--radii", type=float, nargs="+", default=[50.0, 100.0, 150.0, 200.0])
    parser.add_argument("--trials", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print("=" * 60)
    print("Solver Timing Comparison")
    print("=" * 60)

    reports = [time_radius(radius, args.trials, args.seed) for radius in args.radii]
    for report in reports:
        print_timing_report(report)

    print("\n" + "=" * 60)
    print("SPEED RATIOS (vs gradient descent)")
    print("=" * 60)
    for report in reports:
        rows = report["solvers"]
        if rows.get("gd") is None:
            continue
        base = rows["gd"]["time_s"]
        ratios = ", ".join(
            f"{name}={row['time_s'] / base:.0f}x" for name, row in rows.items() if row is not None and name != "gd"
        )
        print(f"  {report['radius']:g} m: {ratios}")


if __name__ == "__main__":
    main()
