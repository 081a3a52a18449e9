"""CSV and JSON writers with fixed float formatting.

Every float is written as ``%.11e`` (12 significant digits). CSV files carry
one header line of ``name [unit]`` fields; JSON files are an object with a
``meta`` block and column-oriented ``data``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

FLOAT_FMT = "%.11e"


@dataclass(frozen=True)
class Column:
    name: str
    unit: str
    values: object

    @property
    def header(self) -> str:
        return f"{self.name} [{self.unit}]"


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return FLOAT_FMT % x
    return str(x)


def _as_list(values):
    return values.tolist() if isinstance(values, np.ndarray) else list(values)


def csv_text(columns) -> str:
    cols = [_as_list(c.values) for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    lines = [",".join(c.header for c in columns)]
    for i in range(n):
        lines.append(",".join(format_value(col[i]) for col in cols))
    return "\n".join(lines) + "\n"


def _json_value(x) -> str:
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in _as_list(x)) + "]"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "null" if not math.isfinite(x) else FLOAT_FMT % x
    return json.dumps(str(x))


def json_text(columns, meta: dict) -> str:
    data = {c.name: _as_list(c.values) for c in columns}
    units = {c.name: c.unit for c in columns}
    return _json_value({"meta": dict(meta, units=units), "data": data}) + "\n"


def write_table(path, columns, meta: dict | None = None, fmt: str = "csv") -> None:
    if fmt == "csv":
        text = csv_text(columns)
    elif fmt == "json":
        text = json_text(columns, meta or {})
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_json_value(obj) + "\n")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def read_csv(path):
    """Return ``(headers, rows)`` with numeric fields parsed as floats."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    headers = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        row = []
        for field in line.split(","):
            try:
                row.append(float(field))
            except ValueError:
                row.append(field)
        rows.append(row)
    return headers, rows
