"""Event-level records and the CSV reader.

Input CSV: UTF-8, header row, ``event_id,country,region,disaster,date,idp_count``
followed by any number of numeric feature columns. Decimal point ``.``;
thousands separators are rejected.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from types import MappingProxyType

import polars as pl

from ..errors import DataError, ParseError, SchemaError

logger = logging.getLogger(__name__)

MANDATORY_COLUMNS = ("event_id", "country", "region", "disaster", "idp_count")
META_COLUMNS = ("event_id", "country", "region", "disaster", "date", "idp_count")

_DATE_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])$")
_LINE = "__line"


class Region(StrEnum):
    AFRICA = "Africa"
    ASIA = "Asia"

    @classmethod
    def parse(cls, value: str) -> Region:
        return _parse_enum(cls, value)


class Disaster(StrEnum):
    FLOOD = "Flood"
    STORM = "Storm"

    @classmethod
    def parse(cls, value: str) -> Disaster:
        return _parse_enum(cls, value)


def _parse_enum(cls, value: str):
    key = (value or "").strip().lower()
    for member in cls:
        if member.value.lower() == key:
            return member
    raise ValueError(f"{value!r} is not one of {[m.value for m in cls]}")


@dataclass(frozen=True)
class EventRecord:
    event_id: str
    country: str
    region: Region
    disaster: Disaster
    idp_count: int | None
    features: Mapping[str, float | None] = field(default_factory=dict)
    date: str | None = None

    def __post_init__(self) -> None:
        if self.idp_count is not None and self.idp_count < 1:
            raise DataError(f"event {self.event_id}: idp_count must be >= 1, got {self.idp_count}")
        object.__setattr__(self, "features", MappingProxyType(dict(self.features)))


def load_csv(path: str | Path, *, require_target: bool = True) -> list[EventRecord]:
    """Parse an event CSV; every malformed cell is reported with its line number."""
    path = Path(path)
    try:
        raw = pl.read_csv(path, infer_schema_length=0, encoding="utf8")
    except pl.exceptions.NoDataError as exc:
        raise SchemaError(f"{path}: file is empty (header row required)") from exc
    except pl.exceptions.ComputeError as exc:
        raise DataError(f"{path}: unreadable CSV: {exc}") from exc
    raw = raw.rename({c: c.strip() for c in raw.columns})

    required = MANDATORY_COLUMNS if require_target else tuple(c for c in MANDATORY_COLUMNS if c != "idp_count")
    missing = [c for c in required if c not in raw.columns]
    if missing:
        raise SchemaError(f"{path}: missing mandatory column(s): {', '.join(missing)}", missing=missing)

    feature_names = [c for c in raw.columns if c not in META_COLUMNS]
    df = raw.with_row_index(_LINE, offset=2)
    problems: list[tuple[int, str]] = []
    lines: list[int] = df[_LINE].to_list()

    def text(col: str) -> list[str | None]:
        if col not in df.columns:
            return [None] * df.height
        return [None if v is None or not v.strip() else v.strip() for v in df[col].to_list()]

    event_ids, countries = text("event_id"), text("country")
    regions_raw, disasters_raw, dates = text("region"), text("disaster"), text("date")

    numeric_cols = [c for c in ["idp_count", *feature_names] if c in df.columns]
    parsed = df.select(
        [pl.col(c).str.strip_chars().cast(pl.Float64, strict=False).alias(c) for c in numeric_cols]
    )

    seen: dict[str, int] = {}
    for i, line in enumerate(lines):
        for col, values in (("event_id", event_ids), ("country", countries)):
            if values[i] is None:
                problems.append((line, f"{col}: missing value"))
        eid = event_ids[i]
        if eid is not None:
            if eid in seen:
                problems.append((line, f"event_id: duplicate of line {seen[eid]}"))
            else:
                seen[eid] = line
        for col, values, enum_cls in (("region", regions_raw, Region), ("disaster", disasters_raw, Disaster)):
            try:
                enum_cls.parse(values[i] or "")
            except ValueError as exc:
                problems.append((line, f"{col}: {exc}"))
        if dates[i] is not None and not _DATE_RE.match(dates[i]):
            problems.append((line, f"date: {dates[i]!r} is not YYYY-MM"))

    for col in numeric_cols:
        raw_values = text(col)
        values = parsed[col].to_list()
        for i, line in enumerate(lines):
            cell, value = raw_values[i], values[i]
            if cell is None:
                if col == "idp_count" and require_target:
                    problems.append((line, "idp_count: missing value"))
                continue
            if value is None or value != value or value in (float("inf"), float("-inf")):
                problems.append((line, f"{col}: {cell!r} is not a plain decimal number"))
            elif col == "idp_count" and (value < 1 or value != int(value)):
                problems.append((line, f"idp_count: {cell!r} is not a positive integer"))

    if problems:
        problems.sort(key=lambda p: p[0])
        raise ParseError(problems, path=str(path))

    records: list[EventRecord] = []
    idp_values = parsed["idp_count"].to_list() if "idp_count" in parsed.columns else [None] * df.height
    feature_columns = {c: parsed[c].to_list() for c in feature_names}
    for i in range(df.height):
        idp = idp_values[i]
        records.append(
            EventRecord(
                event_id=str(event_ids[i]),
                country=str(countries[i]),
                region=Region.parse(regions_raw[i] or ""),
                disaster=Disaster.parse(disasters_raw[i] or ""),
                idp_count=None if idp is None else int(idp),
                features={c: feature_columns[c][i] for c in feature_names},
                date=dates[i],
            )
        )
    logger.info("csv_loaded", extra={"path": str(path), "rows": len(records), "features": len(feature_names)})
    return records


def records_to_frame(records: Sequence[EventRecord]) -> pl.DataFrame:
    """One row per event in the CSV column layout (features in first-seen order)."""
    feature_names: list[str] = []
    for r in records:
        for name in r.features:
            if name not in feature_names:
                feature_names.append(name)
    data: dict[str, list] = {
        "event_id": [r.event_id for r in records],
        "country": [r.country for r in records],
        "region": [r.region.value for r in records],
        "disaster": [r.disaster.value for r in records],
        "date": [r.date for r in records],
        "idp_count": [r.idp_count for r in records],
    }
    for name in feature_names:
        data[name] = [r.features.get(name) for r in records]
    schema: dict[str, pl.DataType] = {
        "event_id": pl.String,
        "country": pl.String,
        "region": pl.String,
        "disaster": pl.String,
        "date": pl.String,
        "idp_count": pl.Int64,
    }
    schema.update({name: pl.Float64 for name in feature_names})
    return pl.DataFrame(data, schema=schema)


def write_csv(records: Sequence[EventRecord], path: str | Path) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    records_to_frame(records).write_csv(out)
    return out


__all__ = [
    "MANDATORY_COLUMNS",
    "Region",
    "Disaster",
    "EventRecord",
    "load_csv",
    "records_to_frame",
    "write_csv",
]
