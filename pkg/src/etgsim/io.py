"""CSV emission and parsing with exact float round-trip.

Floats are written with 17 significant digits, comma separators, LF line
endings, and a header row, so re-parsing a file reproduces the in-memory
arrays bit for bit on any platform.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.17g}"


def write_csv(path, header: Sequence[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def write_columns(path, header: Sequence[str], columns: Sequence) -> None:
    cols = [np.asarray(c) for c in columns]
    if any(len(c) != len(cols[0]) for c in cols):
        raise ValueError("columns must have equal length")
    write_csv(path, header, zip(*cols))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text()
    lines = [ln for ln in text.split("\n") if ln]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def read_columns(path) -> dict[str, np.ndarray]:
    header, rows = read_csv(path)
    data = {name: np.empty(len(rows)) for name in header}
    for r, row in enumerate(rows):
        for name, cell in zip(header, row):
            data[name][r] = float(cell)
    return data
