"""Synthetic datasets drawn from the composite-kernel GP itself.

Used as a stand-in for the non-distributed event data and as the oracle
for relevance recovery: γ_d is non-zero exactly on the planted features.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from ..gp.kernels import HyperParams, kernel_matrix
from .pipeline import Dataset, EventMeta
from .records import Disaster, EventRecord, Region, write_csv

logger = logging.getLogger(__name__)

GENERATION_JITTER = 1e-10
_MAX_JITTER = 1e-6
# ln(idp_count) = y + offset keeps synthetic counts in the thousands
LOG_COUNT_OFFSET = 10.0
SYNTH_COUNTRY = "Synthland"


@dataclass(frozen=True)
class SynthSpec:
    n: int
    d: int
    relevant: frozenset[int]
    true_hp: HyperParams
    noise_sigma: float
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "relevant", frozenset(int(i) for i in self.relevant))
        if self.n < 2 or self.d < 1:
            raise ValueError(f"need n >= 2 and d >= 1, got n={self.n}, d={self.d}")
        if not self.relevant <= set(range(1, self.d + 1)):
            raise ValueError(f"relevant features {sorted(self.relevant)} outside 1..{self.d}")
        if self.true_hp.dim != self.d:
            raise ValueError(f"true_hp has {self.true_hp.dim} gammas for d={self.d}")
        for i, g in enumerate(self.true_hp.gamma, start=1):
            if (g > 0) != (i in self.relevant):
                raise ValueError(f"gamma_{i}={g} contradicts the relevant set {sorted(self.relevant)}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    @classmethod
    def planted(
        cls,
        n: int,
        d: int,
        relevant: Iterable[int],
        *,
        gamma: float = 0.5,
        nu: float = 4.0,
        sigma_n: float = 0.3,
        noise_sigma: float = 0.3,
        seed: int = 0,
    ) -> SynthSpec:
        rel = frozenset(relevant)
        hp = HyperParams(nu=nu, gamma=tuple(gamma if i in rel else 0.0 for i in range(1, d + 1)), sigma_n=sigma_n)
        return cls(n=n, d=d, relevant=rel, true_hp=hp, noise_sigma=noise_sigma, seed=seed)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f"x{i}" for i in range(1, self.d + 1))

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "d": self.d,
            "relevant": sorted(self.relevant),
            "true_hp": self.true_hp.to_dict(),
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class GroundTruth:
    spec: SynthSpec
    f: np.ndarray

    @property
    def relevant_names(self) -> tuple[str, ...]:
        return tuple(f"x{i}" for i in sorted(self.spec.relevant))

    def to_dict(self) -> dict[str, Any]:
        return {"spec": self.spec.to_dict(), "relevant_features": list(self.relevant_names)}


def _draw_cholesky(K: np.ndarray) -> np.ndarray:
    jitter = GENERATION_JITTER
    eye = np.eye(K.shape[0])
    while True:
        try:
            return cholesky(K + jitter * eye, lower=True, check_finite=False)
        except LinAlgError:
            if jitter >= _MAX_JITTER:
                raise
            jitter *= 10.0
            logger.debug("synthetic_jitter_raised", extra={"jitter": jitter})


def _placeholder_meta(n: int) -> tuple[EventMeta, ...]:
    regions, disasters = list(Region), list(Disaster)
    return tuple(
        EventMeta(
            event_id=f"SYN{i + 1:04d}",
            country=SYNTH_COUNTRY,
            region=regions[i % len(regions)],
            disaster=disasters[(i // len(regions)) % len(disasters)],
        )
        for i in range(n)
    )


def generate(spec: SynthSpec) -> tuple[Dataset, GroundTruth]:
    rng = np.random.default_rng(spec.seed)
    X = rng.standard_normal((spec.n, spec.d))
    K = kernel_matrix(X, spec.true_hp, with_noise=False)
    L = _draw_cholesky(K)
    f = L @ rng.standard_normal(spec.n)
    y = f + spec.noise_sigma * rng.standard_normal(spec.n)
    dataset = Dataset(feature_names=spec.feature_names, X=X, y=y, meta=_placeholder_meta(spec.n))
    return dataset, GroundTruth(spec=spec, f=f)


def to_records(dataset: Dataset) -> list[EventRecord]:
    """Event records in the CSV schema; ln(idp_count) − LOG_COUNT_OFFSET ≈ y."""
    records: list[EventRecord] = []
    for i, meta in enumerate(dataset.meta):
        count = max(1, int(round(math.exp(float(dataset.y[i]) + LOG_COUNT_OFFSET))))
        records.append(
            EventRecord(
                event_id=meta.event_id,
                country=meta.country,
                region=meta.region,
                disaster=meta.disaster,
                idp_count=count,
                features={name: float(dataset.X[i, j]) for j, name in enumerate(dataset.feature_names)},
                date="2018-01",
            )
        )
    return records


def write_synthetic_csv(dataset: Dataset, path: str | Path) -> Path:
    return write_csv(to_records(dataset), path)


def planted_relevance_rank(feature_order: Sequence[str], truth: GroundTruth) -> bool:
    """True when the planted features occupy exactly the top ranks."""
    k = len(truth.spec.relevant)
    return set(feature_order[:k]) == set(truth.relevant_names)


__all__ = [
    "SynthSpec",
    "GroundTruth",
    "generate",
    "to_records",
    "write_synthetic_csv",
    "planted_relevance_rank",
]
