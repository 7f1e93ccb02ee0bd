"""CSV matrix I/O and JSON run reports."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError

REPORT_SCHEMA = "curspca.report/1"
METRIC_FIELDS = ("err_reg", "err_pca", "precision", "active_count", "objective_final",
                 "kkt_residual", "iterations", "converged")


def load_matrix(path, skip_header: bool = False) -> np.ndarray:
    """Read a comma-delimited numeric matrix. Blank lines are ignored.

    Raises ParseError naming the 1-based row/column of the first bad cell.
    """
    path = Path(path)
    rows = []
    width = None
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for lineno, cells in enumerate(reader, start=1):
            if skip_header and lineno == 1:
                continue
            if not cells or all(not c.strip() for c in cells):
                continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ParseError(f"{path}: ragged row with {len(cells)} cells, expected {width}", row=lineno)
            vals = []
            for j, cell in enumerate(cells, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"{path}: non-numeric cell {cell.strip()!r}", row=lineno, col=j) from None
                if not math.isfinite(v):
                    raise ParseError(f"{path}: non-finite cell {cell.strip()!r}", row=lineno, col=j)
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def save_matrix(path, m) -> None:
    """Write ``m`` as CSV with 17 significant digits (exact float64 round trip)."""
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    try:
        np.savetxt(path, m, delimiter=",", fmt="%.17g")
    except OSError as exc:
        raise OSError(f"cannot write matrix to {path}: {exc.strerror or exc}") from exc


def save_indices(path, indices) -> None:
    """0-based indices, one per line, ascending."""
    text = "".join(f"{int(i)}\n" for i in sorted(int(i) for i in indices))
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write indices to {path}: {exc.strerror or exc}") from exc


def load_indices(path) -> np.ndarray:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            out.append(int(line))
        except ValueError:
            raise ParseError(f"{path}: not an integer index: {line!r}", row=lineno) from None
    return np.array(out, dtype=np.int64)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def make_report(command: str, config: dict, metrics: dict, seed, timing_ms: float, **extra) -> dict:
    """Assemble a report dict; every field in METRIC_FIELDS is present (``None`` if not applicable)."""
    full = {key: None for key in METRIC_FIELDS}
    full.update(metrics)
    report = {
        "schema": REPORT_SCHEMA,
        "command": command,
        "config": config,
        "metrics": full,
        "seed": seed,
        "timing_ms": timing_ms,
    }
    report.update(extra)
    return _jsonable(report)


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(path, report: dict) -> None:
    try:
        Path(path).write_text(dump_report(report))
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
