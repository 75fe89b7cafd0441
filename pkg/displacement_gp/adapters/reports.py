"""CSV and JSON writers for exported artifacts.

Outputs carry no timestamps or host details, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import polars as pl


def write_json(payload: Mapping[str, Any] | Sequence[Any], path: str | Path) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    return out


def write_rows_csv(rows: Sequence[Mapping[str, Any]], path: str | Path, *, columns: Sequence[str] | None = None) -> Path:
    """Rows as CSV; ``columns`` fixes the header when ``rows`` may be empty."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    if rows:
        df = pl.DataFrame([dict(r) for r in rows])
        if columns is not None:
            df = df.select(list(columns))
    else:
        df = pl.DataFrame({c: [] for c in (columns or [])})
    df.write_csv(out, float_precision=10)
    return out


def _flat_run(row: Mapping[str, Any]) -> dict[str, Any]:
    hp = row["hyperparameters"]
    flat = {k: v for k, v in row.items() if k != "hyperparameters"}
    flat["nu"] = hp["nu"]
    for i, g in enumerate(hp["gamma"], start=1):
        flat[f"gamma_{i}"] = g
    flat["sigma_n"] = hp["sigma_n"]
    return flat


def write_runs_csv(run_dicts: Sequence[Mapping[str, Any]], path: str | Path) -> Path:
    return write_rows_csv([_flat_run(r) for r in run_dicts], path)


__all__ = ["write_json", "write_rows_csv", "write_runs_csv"]
