"""Feature relevance from fitted ARD weights γ_d."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy.stats import rankdata

from ..errors import DimensionError
from ..gp.kernels import HyperParams

if TYPE_CHECKING:
    from .experiment import RunResult


@dataclass(frozen=True)
class RankingEntry:
    feature: str
    gamma_median: float
    mean_rank: float

    def to_dict(self) -> dict[str, Any]:
        return {"feature": self.feature, "gamma_median": self.gamma_median, "mean_rank": self.mean_rank}


@dataclass(frozen=True)
class FeatureRanking:
    entries: tuple[RankingEntry, ...]
    n_runs: int

    @property
    def feature_order(self) -> tuple[str, ...]:
        return tuple(e.feature for e in self.entries)

    def to_rows(self) -> list[dict[str, Any]]:
        return [e.to_dict() for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def _run_ranks(gamma: np.ndarray) -> np.ndarray:
    # rank 1 = largest γ; ordinal ties fall back to feature position
    return rankdata(-gamma, method="ordinal")


def rank_features(fitted: Sequence[HyperParams], feature_names: Sequence[str]) -> FeatureRanking:
    if not fitted:
        raise ValueError("rank_features needs at least one fitted model")
    names = tuple(feature_names)
    dims = {hp.dim for hp in fitted}
    if dims != {len(names)}:
        raise DimensionError(f"gamma dimensions {sorted(dims)} do not match {len(names)} feature names")
    gammas = np.array([hp.gamma_array for hp in fitted])
    ranks = np.array([_run_ranks(g) for g in gammas], dtype=float)
    mean_rank = ranks.mean(axis=0)
    median = np.median(gammas, axis=0)
    order = sorted(range(len(names)), key=lambda j: (mean_rank[j], j))
    entries = tuple(
        RankingEntry(feature=names[j], gamma_median=float(median[j]), mean_rank=float(mean_rank[j])) for j in order
    )
    return FeatureRanking(entries=entries, n_runs=len(fitted))


def gamma_table(runs: Sequence[RunResult], feature_names: Sequence[str]) -> list[dict[str, Any]]:
    """Per-run γ_d with the within-run rank."""
    rows: list[dict[str, Any]] = []
    for run in runs:
        gamma = run.fitted_hp.gamma_array
        if gamma.size != len(feature_names):
            raise DimensionError(f"run {run.run_index} has {gamma.size} gammas for {len(feature_names)} features")
        ranks = _run_ranks(gamma)
        for j, name in enumerate(feature_names):
            rows.append({"run_index": run.run_index, "feature": name, "gamma": float(gamma[j]), "rank": int(ranks[j])})
    return rows


__all__ = ["RankingEntry", "FeatureRanking", "rank_features", "gamma_table"]
