"""CSV and JSON writers for reports, trajectories and ensembles.

Every file carries the config hash, seed and package version.  CSV files put
them on a leading ``#`` comment line; floats are written with 17 significant
digits so the text round-trips and repeated runs compare byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .rates import RECORD_FIELDS, RateReport

TRAJECTORY_COLUMNS = ("t", "px", "py", "pz", "H")
ENSEMBLE_COLUMNS = ("t", "mean_H", "stderr_H", "n_traj")
MISSING = "NA"


def metadata(config_hash: str, seed: int, **extra) -> dict:
    return {"config_hash": config_hash, "seed": int(seed), "version": __version__, **extra}


def format_value(value) -> str:
    if value is None:
        return MISSING
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return MISSING if not math.isfinite(value) else format(value, ".17g")
    return str(value)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _clean(obj):
    # NaN/inf are not valid JSON
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_clean(json.loads(json.dumps(payload, default=_json_default))), indent=2, sort_keys=True)
    path.write_text(text + "\n")
    return path


def write_csv(path, columns, rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if meta is not None:
        lines.append("# " + " ".join(f"{k}={format_value(v)}" for k, v in meta.items()))
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def report_rows(reports):
    return [[r.to_record()[f] for f in RECORD_FIELDS] for r in reports]


def write_reports_csv(path, reports, meta=None) -> Path:
    return write_csv(path, RECORD_FIELDS, report_rows(reports), meta)


def write_report_json(path, report: RateReport, meta: dict) -> Path:
    return write_json(path, {"report": report.to_record(), "metadata": meta})


def write_trajectory_csv(path, traj, meta=None) -> Path:
    H = np.sum(traj.momenta**2, axis=1) / (2.0 * traj.params.mass)
    rows = [[t, *p, h] for t, p, h in zip(traj.times, traj.momenta, H)]
    return write_csv(path, TRAJECTORY_COLUMNS, rows, meta)


def write_ensemble_csv(path, stats, meta=None, overlay=None, overlay_name="E_exact") -> Path:
    columns = list(ENSEMBLE_COLUMNS)
    if overlay is not None:
        columns.append(overlay_name)
    rows = []
    for i, t in enumerate(stats.time_grid):
        row = [t, stats.mean_H[i], stats.stderr_H[i], stats.n_traj]
        if overlay is not None:
            row.append(overlay[i])
        rows.append(row)
    return write_csv(path, columns, rows, meta)


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and raw rows, skipping ``#`` metadata lines."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]
