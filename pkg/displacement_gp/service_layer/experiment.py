"""Repeated train/test evaluation of the composite-kernel GP.

Each run draws its own partition (seed ``base_seed + run``), standardizes
on the training fold, re-optimizes hyperparameters, fits and scores the
held-out fold. Runs are independent and are merged by run index.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import Any, NamedTuple

import numpy as np
from scipy.linalg import LinAlgError
from scipy.stats import pearsonr

from ..data.pipeline import DEFAULT_LOG_FEATURES, Dataset, SubsetFilter, compute_stats, split, standardize
from ..errors import DataError, DimensionError, DisplacementGPError, RunFailedError
from ..gp.core import fit, predict_batch
from ..gp.kernels import HyperParams
from ..optim.bayesopt import optimize_hyperparameters
from ..optim.space import BOConfig, SearchSpace, best_record
from ..utils.parallel import map_ordered
from .ranking import FeatureRanking, rank_features

logger = logging.getLogger(__name__)

MIN_EXPERIMENT_EVENTS = 8


@dataclass(frozen=True)
class Metrics:
    r2: float
    me: float
    rmse: float

    def to_dict(self) -> dict[str, float]:
        return {"r2": self.r2, "me": self.me, "rmse": self.rmse}


def compute_metrics(y_true: Sequence[float] | np.ndarray, y_pred: Sequence[float] | np.ndarray) -> Metrics:
    """Squared Pearson correlation, mean error (prediction minus truth) and RMSE."""
    t = np.asarray(y_true, dtype=float).reshape(-1)
    p = np.asarray(y_pred, dtype=float).reshape(-1)
    if t.size == 0 or t.size != p.size:
        raise DimensionError(f"metric inputs need equal non-zero lengths, got {t.size} and {p.size}")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
        raise DataError("metric inputs contain non-finite values")
    if np.ptp(t) == 0:
        raise DataError("r2 is undefined for a constant y_true")
    err = p - t
    if np.ptp(p) == 0:
        r2 = 0.0
    else:
        r = float(pearsonr(p, t).statistic)
        r2 = min(1.0, r * r)
    return Metrics(r2=r2, me=float(err.mean()), rmse=float(math.sqrt(np.mean(err**2))))


@dataclass(frozen=True)
class ExperimentConfig:
    filter: SubsetFilter = field(default_factory=SubsetFilter)
    runs: int = 100
    train_fraction: float = 0.75
    base_seed: int = 0
    bo: BOConfig = field(default_factory=BOConfig)
    space: SearchSpace | None = None
    bounds: Mapping[str, Any] | None = None
    workers: int = 1
    log_features: tuple[str, ...] = DEFAULT_LOG_FEATURES

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def search_space(self, n_features: int) -> SearchSpace:
        """Explicit space if given, else bounds (or defaults) expanded to D features."""
        if self.space is not None:
            if self.space.n_features != n_features:
                raise DimensionError(f"search space covers {self.space.n_features} features, data has {n_features}")
            return self.space
        return SearchSpace.from_bounds(self.bounds or {}, n_features)


@dataclass(frozen=True)
class RunResult:
    run_index: int
    seed: int
    metrics: Metrics
    fitted_hp: HyperParams
    n_train: int
    n_test: int
    best_objective: float
    evaluations: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_index": self.run_index,
            "seed": self.seed,
            **self.metrics.to_dict(),
            "n_train": self.n_train,
            "n_test": self.n_test,
            "best_lml": self.best_objective,
            "evaluations": self.evaluations,
            "hyperparameters": self.fitted_hp.to_dict(),
        }


@dataclass(frozen=True)
class AggregateReport:
    subset: str
    n_events: int
    n_features: int
    runs: int
    r2_mean: float
    r2_std: float
    me_mean: float
    me_std: float
    rmse_mean: float
    rmse_std: float
    feature_names: tuple[str, ...] = ()
    dropped_features: tuple[str, ...] = ()

    @classmethod
    def from_runs(
        cls,
        runs: Sequence[RunResult],
        *,
        subset: str,
        n_events: int,
        feature_names: Sequence[str],
        dropped_features: Sequence[str] = (),
    ) -> AggregateReport:
        if not runs:
            raise ValueError("cannot aggregate zero runs")
        r2 = np.array([r.metrics.r2 for r in runs])
        me = np.array([r.metrics.me for r in runs])
        rmse = np.array([r.metrics.rmse for r in runs])
        return cls(
            subset=subset,
            n_events=n_events,
            n_features=len(feature_names),
            runs=len(runs),
            r2_mean=float(r2.mean()),
            r2_std=float(r2.std()),
            me_mean=float(me.mean()),
            me_std=float(me.std()),
            rmse_mean=float(rmse.mean()),
            rmse_std=float(rmse.std()),
            feature_names=tuple(feature_names),
            dropped_features=tuple(dropped_features),
        )

    def to_row(self) -> dict[str, Any]:
        return {
            "subset": self.subset,
            "n_events": self.n_events,
            "n_features": self.n_features,
            "runs": self.runs,
            "r2_mean": self.r2_mean,
            "r2_std": self.r2_std,
            "me_mean": self.me_mean,
            "me_std": self.me_std,
            "rmse_mean": self.rmse_mean,
            "rmse_std": self.rmse_std,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.to_row(),
            "feature_names": list(self.feature_names),
            "dropped_features": list(self.dropped_features),
        }


class ExperimentResult(NamedTuple):
    report: AggregateReport
    runs: list[RunResult]
    ranking: FeatureRanking


def _subset_rows(dataset: Dataset, subset: SubsetFilter) -> Dataset:
    keep = [i for i, m in enumerate(dataset.meta) if subset.matches(m.region, m.disaster)]
    if len(keep) == dataset.n:
        return dataset
    return dataset.subset(keep)


def prepare_dataset(dataset: Dataset, config: ExperimentConfig) -> Dataset:
    """Apply the subset filter and drop features constant over the whole subset."""
    data = _subset_rows(dataset, config.filter)
    if data.n < MIN_EXPERIMENT_EVENTS:
        raise DataError(
            f"subset {config.filter.label} has {data.n} events; at least {MIN_EXPERIMENT_EVENTS} are required"
        )
    if not np.all(np.isfinite(data.y)):
        raise DataError("experiment targets must be finite (idp_count required)")
    stats = compute_stats(data, drop_constant=True)
    if not stats.feature_names:
        raise DataError(f"subset {config.filter.label} has no non-constant features")
    if stats.dropped:
        logger.info("constant_features_dropped", extra={"features": list(stats.dropped)})
        data = replace(
            data.select_features(stats.feature_names),
            dropped_features=tuple(dict.fromkeys([*data.dropped_features, *stats.dropped])),
        )
    return data


def run_single(data: Dataset, config: ExperimentConfig, space: SearchSpace, run_index: int) -> RunResult:
    seed = config.base_seed + run_index
    train_idx, test_idx = split(data, config.train_fraction, seed)
    train, stats = standardize(data.subset(train_idx), drop_constant=False)
    test, _ = standardize(data.subset(test_idx), stats)
    y_mean = float(train.y.mean())
    y_centered = train.y - y_mean

    hp, history = optimize_hyperparameters(train.X, y_centered, space, replace(config.bo, seed=seed))
    model = fit(train.X, y_centered, hp, feature_names=train.feature_names, stats=stats, target_mean=y_mean)
    mean, _ = predict_batch(model, test.X)
    metrics = compute_metrics(test.y, mean + y_mean)
    best = best_record(history)
    logger.debug("run_finished", extra={"run": run_index, **metrics.to_dict()})
    return RunResult(
        run_index=run_index,
        seed=seed,
        metrics=metrics,
        fitted_hp=hp,
        n_train=train.n,
        n_test=test.n,
        best_objective=best.objective if best else -math.inf,
        evaluations=len(history),
    )


def run_experiment(dataset: Dataset, config: ExperimentConfig) -> ExperimentResult:
    """Run the repeated-split protocol and aggregate metrics and γ rankings.

    ``dataset`` holds raw (log-scaled, unstandardized) features; rows outside
    ``config.filter`` are ignored. A failing run aborts with RunFailedError.
    """
    data = prepare_dataset(dataset, config)
    space = config.search_space(data.d)
    logger.info(
        "experiment_started",
        extra={"subset": config.filter.label, "events": data.n, "features": data.d, "runs": config.runs},
    )

    def one(run_index: int) -> RunResult:
        try:
            return run_single(data, config, space, run_index)
        except (DisplacementGPError, ValueError, LinAlgError) as exc:
            raise RunFailedError(run_index, exc) from exc

    runs = map_ordered(one, list(range(config.runs)), workers=config.workers)
    runs.sort(key=lambda r: r.run_index)
    report = AggregateReport.from_runs(
        runs,
        subset=config.filter.label,
        n_events=data.n,
        feature_names=data.feature_names,
        dropped_features=data.dropped_features,
    )
    ranking = rank_features([r.fitted_hp for r in runs], data.feature_names)
    logger.info(
        "experiment_finished",
        extra={"subset": report.subset, "r2_mean": report.r2_mean, "rmse_mean": report.rmse_mean},
    )
    return ExperimentResult(report=report, runs=runs, ranking=ranking)


__all__ = [
    "Metrics",
    "compute_metrics",
    "ExperimentConfig",
    "RunResult",
    "AggregateReport",
    "ExperimentResult",
    "prepare_dataset",
    "run_single",
    "run_experiment",
]
