"""CSV and JSON writers with deterministic formatting."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = ["SCHEMA_VERSION", "write_csv", "write_json", "to_jsonable", "format_value"]

SCHEMA_VERSION = "1.0"


def format_value(x) -> str:
    """Shortest round-trip text for numbers; stable across runs."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    if isinstance(x, bytes):
        return x.hex()
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(x) for x in row])
    return path


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else format_value(x)
    if isinstance(obj, bytes):
        return obj.hex()
    return obj


def write_json(path: str | Path, report: dict, timestamp: bool = True) -> Path:
    """Write ``report`` with ``schema_version`` (and a UTC ``timestamp``)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"schema_version": SCHEMA_VERSION}
    if timestamp:
        body["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    body.update(to_jsonable(report))
    path.write_text(json.dumps(body, indent=2, sort_keys=False) + "\n")
    return path
