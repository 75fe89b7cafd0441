"""Published IDP event counts per country, disaster and region, and the
check of a loaded dataset against them.

The bundled country rows are reproduced as published; they do not add up
to the published region and grand totals (228 events against 229). The
totals match the per-model event counts used for evaluation, so the
report's verdict rests on totals and country rows are advisory.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import polars as pl

from .records import Disaster, EventRecord, Region

logger = logging.getLogger(__name__)

_PACKAGE = "displacement_gp.data.tables"
COUNTRIES_FILE = "idp_reference_countries.csv"
TOTALS_FILE = "idp_reference_totals.csv"
FIXTURE_FILE = "idp_events_fixture.csv"

_COUNTRY_ALIASES = {"philipines": "Philippines", "sri lanka": "Sri-Lanka", "drc": "DR Congo"}
_ALL = "All"
_TOTAL = "Total"


def fixture_path() -> Path:
    """Bundled 229-event fixture consistent with the published totals."""
    return Path(str(resources.files(_PACKAGE).joinpath(FIXTURE_FILE)))


def _read_table(name: str) -> pl.DataFrame:
    with resources.files(_PACKAGE).joinpath(name).open("rb") as fh:
        return pl.read_csv(fh)


@lru_cache(maxsize=1)
def reference_countries() -> pl.DataFrame:
    return _read_table(COUNTRIES_FILE)


@lru_cache(maxsize=1)
def reference_totals() -> pl.DataFrame:
    return _read_table(TOTALS_FILE)


def canonical_country(name: str) -> str:
    key = name.strip().lower()
    if key in _COUNTRY_ALIASES:
        return _COUNTRY_ALIASES[key]
    for country in reference_countries()["country"].to_list():
        if country.lower() == key:
            return country
    return name.strip()


@dataclass(frozen=True)
class CountCheck:
    scope: str
    disaster: str
    expected_events: int
    observed_events: int
    expected_idps: int
    observed_idps: int

    @property
    def match(self) -> bool:
        return self.expected_events == self.observed_events and self.expected_idps == self.observed_idps

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "match": self.match}


@dataclass(frozen=True)
class ValidationReport:
    n_events: int
    disaster_events: dict[str, int]
    region_events: dict[str, int]
    total_checks: tuple[CountCheck, ...]
    country_checks: tuple[CountCheck, ...]
    reference_notes: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return all(c.match for c in self.total_checks)

    @property
    def country_mismatches(self) -> tuple[CountCheck, ...]:
        return tuple(c for c in self.country_checks if not c.match)

    def check(self, scope: str, disaster: str = _ALL) -> CountCheck:
        for c in (*self.total_checks, *self.country_checks):
            if c.scope == scope and c.disaster == disaster:
                return c
        raise KeyError((scope, disaster))

    def summary(self) -> str:
        flood = self.disaster_events.get(Disaster.FLOOD.value, 0)
        storm = self.disaster_events.get(Disaster.STORM.value, 0)
        verdict = "OK" if self.ok else "MISMATCH"
        return f"{self.n_events} events, {flood} flood, {storm} storm: {verdict}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "summary": self.summary(),
            "n_events": self.n_events,
            "disaster_events": dict(self.disaster_events),
            "region_events": dict(self.region_events),
            "total_checks": [c.to_dict() for c in self.total_checks],
            "country_checks": [c.to_dict() for c in self.country_checks],
            "country_mismatches": len(self.country_mismatches),
            "reference_notes": list(self.reference_notes),
        }


def _reference_notes() -> tuple[str, ...]:
    countries = reference_countries()
    totals = {row["scope"]: row for row in reference_totals().iter_rows(named=True)}
    notes: list[str] = []
    for region in Region:
        part = countries.filter(pl.col("region") == region.value)
        published = totals[region.value]
        for key in ("flood_events", "flood_idps", "storm_events", "storm_idps"):
            summed = int(part[key].sum())
            if summed != int(published[key]):
                notes.append(f"{region.value} {key}: country rows sum to {summed}, published total is {published[key]}")
    return tuple(notes)


def validate_reference_counts(records: Sequence[EventRecord]) -> ValidationReport:
    """Compare event counts and IDP sums with the published reference; never mutates."""
    events: dict[tuple[str, str], int] = defaultdict(int)
    idps: dict[tuple[str, str], int] = defaultdict(int)
    for r in records:
        keys = [
            (canonical_country(r.country), r.disaster.value),
            (r.region.value, r.disaster.value),
            (r.region.value, _ALL),
            (_TOTAL, r.disaster.value),
            (_TOTAL, _ALL),
        ]
        for key in keys:
            events[key] += 1
            idps[key] += int(r.idp_count or 0)

    total_checks: list[CountCheck] = []
    for row in reference_totals().iter_rows(named=True):
        scope = row["scope"]
        for disaster in Disaster:
            prefix = disaster.value.lower()
            key = (scope, disaster.value)
            total_checks.append(
                CountCheck(scope, disaster.value, int(row[f"{prefix}_events"]), events[key], int(row[f"{prefix}_idps"]), idps[key])
            )
        key = (scope, _ALL)
        total_checks.append(
            CountCheck(
                scope,
                _ALL,
                int(row["flood_events"]) + int(row["storm_events"]),
                events[key],
                int(row["flood_idps"]) + int(row["storm_idps"]),
                idps[key],
            )
        )

    country_checks: list[CountCheck] = []
    known: set[tuple[str, str]] = set()
    for row in reference_countries().iter_rows(named=True):
        for disaster in Disaster:
            prefix = disaster.value.lower()
            key = (row["country"], disaster.value)
            known.add(key)
            country_checks.append(
                CountCheck(row["country"], disaster.value, int(row[f"{prefix}_events"]), events[key], int(row[f"{prefix}_idps"]), idps[key])
            )
    region_names = {r.value for r in Region} | {_TOTAL}
    for key in sorted(k for k in events if k[0] not in region_names and k[1] != _ALL and k not in known):
        country_checks.append(CountCheck(key[0], key[1], 0, events[key], 0, idps[key]))

    report = ValidationReport(
        n_events=len(records),
        disaster_events={d.value: events[(_TOTAL, d.value)] for d in Disaster},
        region_events={r.value: events[(r.value, _ALL)] for r in Region},
        total_checks=tuple(total_checks),
        country_checks=tuple(country_checks),
        reference_notes=_reference_notes(),
    )
    logger.info(
        "reference_validation",
        extra={"ok": report.ok, "events": report.n_events, "country_mismatches": len(report.country_mismatches)},
    )
    return report


__all__ = [
    "CountCheck",
    "ValidationReport",
    "canonical_country",
    "fixture_path",
    "reference_countries",
    "reference_totals",
    "validate_reference_counts",
]
