"""
Report and fixture files.

Benchmark outputs are plain CSV so any plotting tool can read them. Floats
are written with Python's shortest round-trip representation, so a value
read back is bit-identical to the value written.
"""

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import pandas as pd

from locbench.services.bench import ExperimentReport, cdf_points
from locbench.services.errors import ConfigError
from locbench.services.model import MeasurementSet, Scenario

logger = logging.getLogger(__name__)

ERRORS_FILE = "errors.csv"
TIMINGS_FILE = "timings.csv"
CDF_FILE = "cdf.csv"
SUMMARY_FILE = "summary.csv"
MANIFEST_FILE = "manifest.json"

ERRORS_COLUMNS = ["solver", "radius", "trial", "seed", "status", "error_m", "evaluations",
                  "x_m", "y_m", "p0_dbm", "b_m", "tau_s", "cost"]
TIMINGS_COLUMNS = ["solver", "radius", "trial", "seed", "time_s"]
CDF_COLUMNS = ["solver", "error_m", "fraction"]
SUMMARY_COLUMNS = ["solver", "rmse_m", "p80_m", "p95_m", "mean_time_s",
                   "mae_m", "mean_evaluations", "n_trials", "n_failed"]


# ============================================================
# Frames
# ============================================================

def errors_frame(report: ExperimentReport) -> pd.DataFrame:
    """One row per (trial, solver); deterministic for a given master seed."""
    rows = []
    for trial in report.trials:
        for name in report.solvers:
            o = trial.outcomes[name]
            est = o.estimate
            rows.append({
                "solver": name,
                "radius": trial.radius,
                "trial": trial.trial,
                "seed": trial.seed,
                "status": o.status,
                "error_m": o.error_m,
                "evaluations": o.evaluations,
                "x_m": est.x if est else None,
                "y_m": est.y if est else None,
                "p0_dbm": est.p0 if est else None,
                "b_m": est.b if est else None,
                "tau_s": est.tau if est else None,
                "cost": o.cost,
            })
    return pd.DataFrame(rows, columns=ERRORS_COLUMNS)


def timings_frame(report: ExperimentReport) -> pd.DataFrame:
    rows = [
        {
            "solver": name,
            "radius": trial.radius,
            "trial": trial.trial,
            "seed": trial.seed,
            "time_s": trial.outcomes[name].time_s if trial.outcomes[name].ok else None,
        }
        for trial in report.trials
        for name in report.solvers
    ]
    return pd.DataFrame(rows, columns=TIMINGS_COLUMNS)


def cdf_frame(report: ExperimentReport) -> pd.DataFrame:
    rows = []
    for name in report.solvers:
        errors = report.errors(name)
        if not errors:
            continue
        rows.extend({"solver": name, "error_m": e, "fraction": frac} for e, frac in cdf_points(errors))
    return pd.DataFrame(rows, columns=CDF_COLUMNS)


def summary_frame(report: ExperimentReport) -> pd.DataFrame:
    rows = []
    for name in report.solvers:
        s = report.summaries[name].to_dict()
        rows.append({column: s.get(column) for column in SUMMARY_COLUMNS})
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


# ============================================================
# Manifest
# ============================================================

@dataclass
class RunManifest:
    """Everything needed to re-run an experiment."""
    config: Dict[str, Any]
    tool_version: str
    master_seed: int
    timestamp: str = field(default_factory=lambda: datetime.now().isoformat())
    outputs: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool_version": self.tool_version,
            "master_seed": self.master_seed,
            "timestamp": self.timestamp,
            "outputs": self.outputs,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunManifest':
        return cls(
            config=data["config"],
            tool_version=data["tool_version"],
            master_seed=data["master_seed"],
            timestamp=data["timestamp"],
            outputs=list(data.get("outputs", [])),
        )


def write_report(report: ExperimentReport, manifest: RunManifest, out_dir: Union[str, Path]) -> List[Path]:
    """
    Write all report files into out_dir.

    If any write fails, files already written by this call are removed
    before the error propagates.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = [
        (ERRORS_FILE, errors_frame(report)),
        (TIMINGS_FILE, timings_frame(report)),
        (CDF_FILE, cdf_frame(report)),
        (SUMMARY_FILE, summary_frame(report)),
    ]

    written: List[Path] = []
    try:
        for name, frame in frames:
            path = out_dir / name
            frame.to_csv(path, index=False, na_rep="", lineterminator="\n")
            written.append(path)
        manifest.outputs = [p.name for p in written] + [MANIFEST_FILE]
        manifest_path = out_dir / MANIFEST_FILE
        with open(manifest_path, 'w', encoding='utf-8') as f:
            json.dump(manifest.to_dict(), f, indent=2)
        written.append(manifest_path)
    except Exception:
        remove_files(written)
        raise

    logger.info(f"Wrote {len(written)} report files to {out_dir}")
    return written


def remove_files(paths: List[Path]) -> None:
    for path in paths:
        try:
            path.unlink()
        except FileNotFoundError:
            pass


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read back any report CSV."""
    return pd.read_csv(path, keep_default_na=True)


def read_manifest(path: Union[str, Path]) -> RunManifest:
    with open(path, 'r', encoding='utf-8') as f:
        return RunManifest.from_dict(json.load(f))


# ============================================================
# Scenario fixtures
# ============================================================

def write_fixture(path: Union[str, Path], scenario: Scenario, measurements: MeasurementSet, seed: int) -> Path:
    """Write a scenario with one sampled measurement set."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = {
        "scenario": scenario.to_dict(),
        "seed": seed,
        "measurements": measurements.to_dict(),
    }
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2)
    logger.info(f"Wrote scenario fixture to {path}")
    return path


def read_fixture(path: Union[str, Path]) -> Tuple[Scenario, MeasurementSet, int]:
    """
    Read a fixture written by write_fixture.

    Raises:
        ConfigError: if the file is missing or malformed
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"measurements file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        scenario = Scenario.from_dict(data["scenario"])
        measurements = MeasurementSet.from_dict(data["measurements"])
        seed = int(data.get("seed", 0))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"cannot read measurements file {path}: {e}") from e

    if len(measurements) != scenario.n_receivers:
        raise ConfigError(
            f"{path}: {len(measurements)} measurements for {scenario.n_receivers} receivers"
        )
    return scenario, measurements, seed
