"""CSV/JSON helpers: headers are mandatory and floats use shortest round-trip repr."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


class CSVFormatError(ValueError):
    """Malformed input CSV; the message names the offending line."""


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path, columns) -> dict:
    """Read numeric columns by name; returns ``{name: np.ndarray}``."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVFormatError(f"{path}: line 1: missing header") from None
        header = [h.strip() for h in header]
        missing = [c for c in columns if c not in header]
        if missing:
            raise CSVFormatError(f"{path}: line 1: missing column(s) {missing}, header is {header}")
        pos = [header.index(c) for c in columns]
        data = {c: [] for c in columns}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CSVFormatError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            for c, p in zip(columns, pos):
                try:
                    v = float(row[p])
                except ValueError:
                    raise CSVFormatError(f"{path}: line {lineno}: column {c!r} is not a number: {row[p]!r}") from None
                if not math.isfinite(v):
                    raise CSVFormatError(f"{path}: line {lineno}: column {c!r} is not finite")
                data[c].append(v)
    return {c: np.array(v) for c, v in data.items()}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
        fh.write("\n")
    return path


def write_table(path, header, rows, fmt: str = "csv") -> Path:
    """Write a table as CSV, or as JSON ``{"columns": [...], "rows": [...]}``."""
    path = Path(path)
    if fmt == "csv":
        return write_csv(path.with_suffix(".csv"), header, rows)
    if fmt == "json":
        return write_json(path.with_suffix(".table.json"), {"columns": list(header), "rows": [list(r) for r in rows]})
    raise ValueError(f"unknown format {fmt!r}")
