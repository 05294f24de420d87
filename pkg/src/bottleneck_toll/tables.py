"""Deterministic CSV output."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence


def fmt(x) -> str:
    """Shortest of repr and 12 significant digits; '' for None."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    x = float(x)
    if x == 0.0:
        return "0"
    short = repr(x)
    capped = f"{x:.12g}"
    return short if len(short) <= len(capped) and float(capped) == x else capped


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
