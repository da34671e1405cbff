"""
CSV and JSON writers for command results.

Floats use the shortest round-trip representation (repr), so a fixed config
and seed reproduce byte-identical files on any platform.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


def format_number(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return "nan"
        return repr(number)
    return str(value)


def _header(rows: Sequence[Mapping[str, Any]]) -> list[str]:
    """Keys in first-seen order across rows."""
    header: dict[str, None] = {}
    for row in rows:
        header.update(dict.fromkeys(row))
    return list(header)


def write_csv(
    path: Path, rows: Sequence[Mapping[str, Any]], header: Iterable[str] | None = None
) -> Path:
    """Write rows to path; missing values are written as nan."""
    columns = list(header) if header is not None else _header(rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf8") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(format_number(row.get(name, math.nan)) for name in columns)
    return path


def write_matrix_csv(path: Path, names: Sequence[str], matrix: np.ndarray) -> Path:
    """A square matrix with a leading name column, like a covariance table."""
    rows = [
        {"parameter": name, **{other: matrix[i, j] for j, other in enumerate(names)}}
        for i, name in enumerate(names)
    ]
    return write_csv(path, rows, ["parameter", *names])


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else None
    if isinstance(value, Path):
        return str(value)
    return value


def write_json_summary(path: Path, summary: Mapping[str, Any]) -> Path:
    """Write summary as sorted-key JSON; non-finite floats become null."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf8") as json_file:
        json.dump(_jsonable(dict(summary)), json_file, sort_keys=True, indent=2)
        json_file.write("\n")
    return path
