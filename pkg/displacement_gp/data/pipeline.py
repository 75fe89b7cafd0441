"""Filtering, log-scaling, standardization and train/test splitting.

y = ln(idp_count); listed log features (``Pop`` by default) are replaced
by their natural log; every feature is z-scored with population (1/N)
statistics computed on the training rows only.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from numbers import Integral
from typing import Any

import numpy as np
import polars as pl

from ..errors import DataError, DimensionError
from .records import Disaster, EventRecord, Region, records_to_frame

logger = logging.getLogger(__name__)

DEFAULT_LOG_FEATURES = ("Pop",)
MIN_EVENTS = 4


@dataclass(frozen=True)
class SubsetFilter:
    region: Region | None = None
    disaster: Disaster | None = None

    @property
    def label(self) -> str:
        parts = [p.value for p in (self.region, self.disaster) if p is not None]
        return "-".join(parts) if parts else "Global"

    def matches(self, region: Region | str, disaster: Disaster | str) -> bool:
        if self.region is not None and Region(region) != self.region:
            return False
        if self.disaster is not None and Disaster(disaster) != self.disaster:
            return False
        return True

    def to_dict(self) -> dict[str, str | None]:
        return {
            "region": self.region.value if self.region else None,
            "disaster": self.disaster.value if self.disaster else None,
        }


@dataclass(frozen=True)
class EventMeta:
    event_id: str
    country: str
    region: Region
    disaster: Disaster


@dataclass(frozen=True, eq=False)
class Dataset:
    feature_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    meta: tuple[EventMeta, ...]
    dropped_rows: tuple[str, ...] = ()
    dropped_features: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.X.ndim != 2 or self.X.shape[1] != len(self.feature_names):
            raise DimensionError(f"X shape {self.X.shape} does not match {len(self.feature_names)} feature names")
        if self.X.shape[0] != self.y.shape[0] or self.y.shape[0] != len(self.meta):
            raise DimensionError(
                f"row counts disagree: X {self.X.shape[0]}, y {self.y.shape[0]}, meta {len(self.meta)}"
            )

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def d(self) -> int:
        return int(self.X.shape[1])

    def subset(self, indices: Sequence[int] | np.ndarray) -> Dataset:
        idx = np.asarray(indices, dtype=int)
        return replace(self, X=self.X[idx], y=self.y[idx], meta=tuple(self.meta[i] for i in idx))

    def select_features(self, names: Sequence[str]) -> Dataset:
        missing = [n for n in names if n not in self.feature_names]
        if missing:
            raise DimensionError(f"dataset lacks feature(s): {', '.join(missing)}")
        cols = [self.feature_names.index(n) for n in names]
        return replace(self, feature_names=tuple(names), X=self.X[:, cols])


@dataclass(frozen=True, eq=False)
class StandardizationStats:
    feature_names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    dropped: tuple[str, ...] = ()
    constant: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not (len(self.feature_names) == self.mean.size == self.std.size):
            raise DimensionError("stats vectors disagree with feature names")
        if np.any(self.std <= 0):
            raise DataError("standardization std must be positive for retained features")

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std

    def inverse_transform(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.std + self.mean

    def to_dict(self) -> dict[str, Any]:
        return {
            "feature_names": list(self.feature_names),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "dropped": list(self.dropped),
            "constant": list(self.constant),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> StandardizationStats:
        return cls(
            feature_names=tuple(data["feature_names"]),
            mean=np.asarray(data["mean"], dtype=float),
            std=np.asarray(data["std"], dtype=float),
            dropped=tuple(data.get("dropped", ())),
            constant=tuple(data.get("constant", ())),
        )


def _filter_frame(df: pl.DataFrame, subset: SubsetFilter) -> pl.DataFrame:
    if subset.region is not None:
        df = df.filter(pl.col("region") == subset.region.value)
    if subset.disaster is not None:
        df = df.filter(pl.col("disaster") == subset.disaster.value)
    return df


def build_dataset(
    records: Sequence[EventRecord],
    subset: SubsetFilter = SubsetFilter(),
    *,
    feature_names: Sequence[str] | None = None,
    log_features: Sequence[str] = DEFAULT_LOG_FEATURES,
    require_target: bool = True,
) -> Dataset:
    """Filter, log-transform and drop incomplete rows; features stay unstandardized."""
    df = _filter_frame(records_to_frame(records), subset)
    if df.height == 0:
        raise DataError(f"subset {subset.label} is empty")

    available = [c for c in df.columns if c not in ("event_id", "country", "region", "disaster", "date", "idp_count")]
    names = list(feature_names) if feature_names is not None else available
    absent = [n for n in names if n not in df.columns]
    if absent:
        raise DataError(f"records lack feature column(s): {', '.join(absent)}")

    incomplete = df.filter(pl.any_horizontal([pl.col(n).is_null() for n in names])) if names else df.clear()
    dropped_rows = tuple(incomplete["event_id"].to_list())
    if dropped_rows:
        logger.warning("rows_dropped_missing_features", extra={"count": len(dropped_rows), "subset": subset.label})
        df = df.filter(~pl.col("event_id").is_in(list(dropped_rows)))
    if df.height == 0:
        raise DataError(f"subset {subset.label} has no complete rows")

    logged = [n for n in log_features if n in names]
    for name in logged:
        bad = df.filter(pl.col(name) <= 0)
        if bad.height:
            raise DataError(
                f"feature {name} must be positive for log-scaling; event {bad['event_id'][0]} has {bad[name][0]}"
            )
    df = df.with_columns([pl.col(n).log() for n in logged])

    if require_target:
        if df["idp_count"].null_count():
            raise DataError("idp_count missing for some events")
        y = df["idp_count"].cast(pl.Float64).log().to_numpy()
    else:
        y = np.full(df.height, np.nan)

    X = df.select(names).to_numpy().astype(float) if names else np.empty((df.height, 0))
    meta = tuple(
        EventMeta(event_id=e, country=c, region=Region(r), disaster=Disaster(d))
        for e, c, r, d in df.select("event_id", "country", "region", "disaster").iter_rows()
    )
    return Dataset(feature_names=tuple(names), X=X, y=np.asarray(y, dtype=float), meta=meta, dropped_rows=dropped_rows)


def compute_stats(dataset: Dataset, *, drop_constant: bool = True) -> StandardizationStats:
    mean = dataset.X.mean(axis=0)
    std = dataset.X.std(axis=0)
    constant = np.ptp(dataset.X, axis=0) == 0
    names = dataset.feature_names
    if drop_constant:
        keep = ~constant
        return StandardizationStats(
            feature_names=tuple(n for n, k in zip(names, keep) if k),
            mean=mean[keep],
            std=std[keep],
            dropped=tuple(n for n, c in zip(names, constant) if c),
        )
    return StandardizationStats(
        feature_names=names,
        mean=mean,
        std=np.where(constant, 1.0, std),
        constant=tuple(n for n, c in zip(names, constant) if c),
    )


def standardize(
    dataset: Dataset,
    stats: StandardizationStats | None = None,
    *,
    drop_constant: bool = True,
) -> tuple[Dataset, StandardizationStats]:
    """Z-score features; stats are computed here only when not supplied (training path)."""
    if stats is None:
        stats = compute_stats(dataset, drop_constant=drop_constant)
        if stats.dropped:
            logger.info("constant_features_dropped", extra={"features": list(stats.dropped)})
    source = dataset.select_features(stats.feature_names)
    out = replace(
        source,
        X=stats.transform(source.X),
        dropped_features=tuple(dict.fromkeys([*dataset.dropped_features, *stats.dropped])),
    )
    if not np.all(np.isfinite(out.X)):
        raise DataError("standardized features contain non-finite values")
    return out, stats


def preprocess(
    records: Sequence[EventRecord],
    subset: SubsetFilter = SubsetFilter(),
    stats: StandardizationStats | None = None,
    *,
    log_features: Sequence[str] = DEFAULT_LOG_FEATURES,
    require_target: bool = True,
) -> tuple[Dataset, StandardizationStats]:
    raw = build_dataset(
        records,
        subset,
        feature_names=stats.feature_names if stats is not None else None,
        log_features=log_features,
        require_target=require_target,
    )
    if stats is None and raw.n < MIN_EVENTS:
        raise DataError(f"subset {subset.label} has {raw.n} events; at least {MIN_EVENTS} are required")
    return standardize(raw, stats)


def split(
    dataset: Dataset | Integral,
    train_fraction: float,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Random partition; train size is ``train_fraction·N`` rounded half up."""
    n = int(dataset) if isinstance(dataset, Integral) else dataset.n
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = int(math.floor(train_fraction * n + 0.5))
    if n_train < 1 or n_train >= n:
        raise DataError(f"split of {n} events at {train_fraction} leaves an empty train or test fold")
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


__all__ = [
    "SubsetFilter",
    "EventMeta",
    "Dataset",
    "StandardizationStats",
    "build_dataset",
    "compute_stats",
    "standardize",
    "preprocess",
    "split",
]
