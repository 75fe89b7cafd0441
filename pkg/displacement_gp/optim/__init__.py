"""Type-II maximum likelihood by Bayesian optimization."""

from .bayesopt import expected_improvement, optimize_hyperparameters, propose_next, random_search
from .space import BOConfig, EvaluationRecord, SearchSpace, initial_design

__all__ = [
    "BOConfig",
    "EvaluationRecord",
    "SearchSpace",
    "expected_improvement",
    "initial_design",
    "optimize_hyperparameters",
    "propose_next",
    "random_search",
]
