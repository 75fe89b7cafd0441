"""Experiment protocol and feature ranking."""

from .experiment import AggregateReport, ExperimentConfig, RunResult, compute_metrics, run_experiment
from .ranking import FeatureRanking, rank_features

__all__ = [
    "AggregateReport",
    "ExperimentConfig",
    "FeatureRanking",
    "RunResult",
    "compute_metrics",
    "rank_features",
    "run_experiment",
]
