"""Search space, budgets and evaluation records for Type-II ML search.

All coordinates are log10 of the hyperparameters, ordered
``[ν, γ_1..γ_D, σ_n]``.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
from scipy.stats import qmc

from ..errors import DimensionError

DEFAULT_NU_BOUNDS = (-3.0, 3.0)
DEFAULT_GAMMA_BOUNDS = (-6.0, 2.0)
DEFAULT_SIGMA_N_BOUNDS = (-3.0, 1.0)


@dataclass(frozen=True, eq=False)
class SearchSpace:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise DimensionError(f"bounds disagree in length: {lo.size} lower vs {hi.size} upper")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("search bounds must be finite")
        if np.any(lo >= hi):
            bad = int(np.argmax(lo >= hi))
            raise ValueError(f"bound {bad}: lower {lo[bad]} is not below upper {hi[bad]}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return int(self.lower.size)

    @property
    def n_features(self) -> int:
        return self.dim - 2

    def contains(self, theta: Sequence[float] | np.ndarray) -> bool:
        t = np.asarray(theta, dtype=float)
        return bool(t.shape == self.lower.shape and np.all(t >= self.lower) and np.all(t <= self.upper))

    def to_unit(self, theta: np.ndarray) -> np.ndarray:
        return (np.asarray(theta, dtype=float) - self.lower) / (self.upper - self.lower)

    def from_unit(self, u: np.ndarray) -> np.ndarray:
        theta = self.lower + np.asarray(u, dtype=float) * (self.upper - self.lower)
        return np.clip(theta, self.lower, self.upper)

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.from_unit(rng.random((n, self.dim)))

    @classmethod
    def default(cls, n_features: int) -> SearchSpace:
        return cls.from_bounds({}, n_features)

    @classmethod
    def from_bounds(cls, bounds: Mapping[str, Any], n_features: int) -> SearchSpace:
        """Build from ``{"nu": [lo, hi], "gamma": [lo, hi] | [[lo, hi], ...], "sigma_n": [lo, hi]}``.

        Values are log10 exponents; missing keys fall back to the defaults.
        """
        unknown = set(bounds) - {"nu", "gamma", "sigma_n"}
        if unknown:
            raise ValueError(f"unknown bound keys: {sorted(unknown)}")
        nu = _pair(bounds.get("nu", DEFAULT_NU_BOUNDS), "nu")
        sigma = _pair(bounds.get("sigma_n", DEFAULT_SIGMA_N_BOUNDS), "sigma_n")
        raw_gamma = bounds.get("gamma", DEFAULT_GAMMA_BOUNDS)
        if len(raw_gamma) > 0 and isinstance(raw_gamma[0], (list, tuple)):
            gammas = [_pair(g, f"gamma[{i}]") for i, g in enumerate(raw_gamma)]
            if len(gammas) != n_features:
                raise DimensionError(f"{len(gammas)} gamma bounds for {n_features} features")
        else:
            gammas = [_pair(raw_gamma, "gamma")] * n_features
        pairs = [nu, *gammas, sigma]
        return cls(lower=np.array([p[0] for p in pairs]), upper=np.array([p[1] for p in pairs]))

    def to_dict(self) -> dict[str, Any]:
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}


def _pair(value: Any, name: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bound {name!r} must be a [lower, upper] pair, got {value!r}") from exc
    return lo, hi


@dataclass(frozen=True)
class BOConfig:
    """Budget for Bayesian optimization; ``initial_design_size=None`` means 2(D+2)."""

    initial_design_size: int | None = None
    iterations: int = 200
    candidate_pool_size: int = 2000
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self) -> None:
        if self.initial_design_size is not None and self.initial_design_size < 1:
            raise ValueError("initial_design_size must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.candidate_pool_size < 1:
            raise ValueError("candidate_pool_size must be >= 1")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be >= 1")

    def resolved(self, n_features: int) -> BOConfig:
        if self.initial_design_size is not None:
            return self
        return replace(self, initial_design_size=2 * (n_features + 2))

    @property
    def total_budget(self) -> int:
        return (self.initial_design_size or 0) + self.iterations


@dataclass(frozen=True)
class EvaluationRecord:
    theta_log: tuple[float, ...]
    objective: float

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.objective)


def initial_design(space: SearchSpace, size: int, seed: int | np.random.Generator) -> np.ndarray:
    """Latin hypercube of ``size`` points; every 1-D projection hits ``size`` strata."""
    if size < 1:
        raise ValueError("initial design size must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sampler = qmc.LatinHypercube(d=space.dim, seed=rng)
    return space.from_unit(sampler.random(n=size))


def best_record(records: Sequence[EvaluationRecord]) -> EvaluationRecord | None:
    finite = [r for r in records if r.is_finite]
    if not finite:
        return None
    # first maximum wins so ties resolve by evaluation order
    return max(finite, key=lambda r: r.objective)


def running_best(records: Sequence[EvaluationRecord]) -> list[float]:
    out: list[float] = []
    cur = -math.inf
    for r in records:
        if r.is_finite and r.objective > cur:
            cur = r.objective
        out.append(cur)
    return out


def trace_rows(records: Sequence[EvaluationRecord]) -> list[dict[str, Any]]:
    rows: list[dict[str, Any]] = []
    for i, r in enumerate(records):
        n_gamma = len(r.theta_log) - 2
        row: dict[str, Any] = {"iteration": i, "log10_nu": r.theta_log[0]}
        for d in range(n_gamma):
            row[f"log10_gamma_{d + 1}"] = r.theta_log[1 + d]
        row["log10_sigma_n"] = r.theta_log[-1]
        row["objective"] = r.objective
        rows.append(row)
    return rows


__all__ = [
    "SearchSpace",
    "BOConfig",
    "EvaluationRecord",
    "initial_design",
    "best_record",
    "running_best",
    "trace_rows",
]
