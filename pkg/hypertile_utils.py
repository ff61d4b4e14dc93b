"""Shared logging, configuration, error types, and report helpers.

Tolerances and defaults are read once from the environment (``HYPERTILE_*``,
optionally through a ``.env`` file) so every report can print the exact
settings it ran with.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from dotenv import load_dotenv

load_dotenv()


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = float(raw)
    except ValueError:
        return default
    return value if value > 0 else default


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        return default


LOG_DIR = Path(os.getenv("HYPERTILE_LOG_DIR", "logs"))
LOG_LEVEL = os.getenv("HYPERTILE_LOG_LEVEL", "INFO").upper()

EPS_GEOM = _env_float("HYPERTILE_EPS_GEOM", 1e-9)
EPS_ANGLE = _env_float("HYPERTILE_EPS_ANGLE", 1e-7)
TOL_OPT = _env_float("HYPERTILE_TOL_OPT", 1e-5)
TOL_AREA = _env_float("HYPERTILE_TOL_AREA", 1e-8)
DEFAULT_RESTARTS = _env_int("HYPERTILE_RESTARTS", 8)
DEFAULT_SEED = _env_int("HYPERTILE_SEED", 0)
N_JOBS = _env_int("HYPERTILE_N_JOBS", 1)


class HypertileError(ValueError):
    """Base class for domain failures; the CLI maps these to exit code 2."""


class DomainError(HypertileError):
    pass


class InvalidPolygonError(HypertileError):
    pass


class DegeneratePolygonError(HypertileError):
    pass


class DegenerateHullError(HypertileError):
    def __init__(self, message: str, witness: Optional[list] = None):
        super().__init__(message)
        self.witness = list(witness or [])


class PrecisionError(HypertileError):
    def __init__(self, message: str, depth: Optional[int] = None):
        super().__init__(message)
        self.depth = depth


class TilingStructureError(HypertileError):
    def __init__(self, message: str, invariant: str = "structure"):
        super().__init__(message)
        self.invariant = invariant


@dataclass
class AuditReport:
    check: str
    passed: bool
    min_slack: float
    witness: Optional[Any] = None
    grid: Dict[str, Any] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)
    table: Optional[pd.DataFrame] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        payload = {
            "check": self.check,
            "passed": bool(self.passed),
            "min_slack": self.min_slack,
            "witness": self.witness,
            "grid": self.grid,
        }
        if self.details:
            payload["details"] = self.details
        return to_jsonable(payload)


def defaults_header() -> dict:
    return {
        "eps_geom": EPS_GEOM,
        "eps_angle": EPS_ANGLE,
        "tol_opt": TOL_OPT,
        "tol_area": TOL_AREA,
        "restarts": DEFAULT_RESTARTS,
        "seed": DEFAULT_SEED,
        "n_jobs": N_JOBS,
    }


def to_jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays and nested containers into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        if math.isnan(value):
            return None
        return value
    return obj


def dumps_json(payload: Any) -> str:
    # repr floats are the shortest string that round-trips (at most 17 significant digits)
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True)


def ensure_directories() -> None:
    for path in (LOG_DIR,):
        path.mkdir(parents=True, exist_ok=True)


def setup_logging(name: str, log_file: Optional[Path] = None) -> logging.Logger:
    ensure_directories()
    logger = logging.getLogger(name)
    logger.setLevel(LOG_LEVEL)

    if not logger.handlers:
        formatter = logging.Formatter(
            "%(asctime)s - %(levelname)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%SZ"
        )

        file_handler = logging.FileHandler(log_file or LOG_DIR / "hypertile.log")
        file_handler.setFormatter(formatter)
        file_handler.setLevel(LOG_LEVEL)

        stream_handler = logging.StreamHandler()
        stream_handler.setFormatter(formatter)
        stream_handler.setLevel(logging.WARNING)

        logger.addHandler(file_handler)
        logger.addHandler(stream_handler)

    return logger


def log_run_record(command: str, status: str, extra: Optional[dict] = None) -> Path:
    ensure_directories()
    csv_path = LOG_DIR / "run_log.csv"
    header_needed = not csv_path.exists()
    with csv_path.open("a", newline="") as f:
        fieldnames = ["timestamp", "command", "status", "details"]
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        if header_needed:
            writer.writeheader()
        writer.writerow(
            {
                "timestamp": datetime.now(timezone.utc).isoformat(),
                "command": command,
                "status": status,
                "details": json.dumps(to_jsonable(extra or {}), sort_keys=True),
            }
        )
    return csv_path


def write_tables(reports: List[AuditReport], directory: Path) -> List[Path]:
    """Persist each report's scan table as ``<check>.csv`` under ``directory``."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for report in reports:
        if report.table is None:
            continue
        path = directory / f"{report.check}.csv"
        report.table.to_csv(path, index=False)
        written.append(path)
    return written


__all__ = [
    "AuditReport",
    "DEFAULT_RESTARTS",
    "DEFAULT_SEED",
    "DegenerateHullError",
    "DegeneratePolygonError",
    "DomainError",
    "EPS_ANGLE",
    "EPS_GEOM",
    "HypertileError",
    "InvalidPolygonError",
    "LOG_DIR",
    "N_JOBS",
    "PrecisionError",
    "TOL_AREA",
    "TOL_OPT",
    "TilingStructureError",
    "defaults_header",
    "dumps_json",
    "ensure_directories",
    "log_run_record",
    "setup_logging",
    "to_jsonable",
    "write_tables",
]
