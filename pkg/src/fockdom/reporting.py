"""Deterministic report files: JSON with sorted keys, CSV tables, plot data."""
from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return f"{float(v.real)!r}{float(v.imag):+r}j"
    return str(v)


def write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                row = [row.get(c, "") for c in columns]
            wr.writerow([_cell(v) for v in row])


def write_report(out_dir, report: dict, tables=None, plotdata=None, config_text: str | None = None) -> Path:
    """Write ``report.json``, ``tables/*.csv``, ``plotdata/*.csv`` and ``config.ini``.

    ``tables`` maps a name to ``(columns, rows)``; ``plotdata`` maps a name
    to ``(x, y)`` sequences.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(_clean(report), fh, sort_keys=True, indent=2)
        fh.write("\n")
    for name, (cols, rows) in (tables or {}).items():
        write_csv(out / "tables" / f"{name}.csv", cols, rows)
    for name, (x, y) in (plotdata or {}).items():
        write_csv(out / "plotdata" / f"{name}.csv", ["x", "y"], zip(x, y))
    if config_text is not None:
        with open(out / "config.ini", "w", encoding="utf-8") as fh:
            fh.write(config_text)
    return out


def default_out_root() -> str:
    return os.environ.get("FOCKDOM_OUT", "fockdom_out")
