"""Exact GP regression with the composite kernel: fit, predict, evidence."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from ..errors import DataError, DimensionError, IllConditionedKernelError
from .kernels import (
    HyperParams,
    as_feature_matrix,
    as_feature_vector,
    cross_kernel_matrix,
    kernel_matrix,
)

if TYPE_CHECKING:
    from ..data.pipeline import StandardizationStats

logger = logging.getLogger(__name__)

DEFAULT_JITTER = 1e-10
NEGATIVE_VARIANCE_TOLERANCE = 1e-10
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class TrainedModel:
    X_train: np.ndarray
    y_train: np.ndarray
    hp: HyperParams
    chol_factor: np.ndarray
    alpha: np.ndarray
    jitter: float = 0.0
    feature_names: tuple[str, ...] = ()
    stats: StandardizationStats | None = None
    target_mean: float = 0.0
    log_features: tuple[str, ...] = ()

    @property
    def n_train(self) -> int:
        return int(self.X_train.shape[0])

    @property
    def dim(self) -> int:
        return int(self.X_train.shape[1])


@dataclass(frozen=True)
class Prediction:
    mean: float
    variance: float


def cholesky_with_jitter(K: np.ndarray, jitter: float = DEFAULT_JITTER) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of K; retries once with ``jitter·I`` on the diagonal."""
    try:
        return cholesky(K, lower=True, check_finite=False), 0.0
    except LinAlgError:
        pass
    logger.debug("cholesky_jitter", extra={"jitter": jitter, "n": K.shape[0]})
    try:
        return cholesky(K + jitter * np.eye(K.shape[0]), lower=True, check_finite=False), jitter
    except LinAlgError as exc:
        raise IllConditionedKernelError(
            f"kernel matrix of size {K.shape[0]} is not positive definite even with jitter {jitter:g}"
        ) from exc


def _validate_training(X: Sequence[Sequence[float]] | np.ndarray, y: Sequence[float] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        M = as_feature_matrix(X)
    except DataError as exc:
        raise DataError(f"training inputs invalid: {exc}") from exc
    t = np.asarray(y, dtype=float).reshape(-1)
    if t.size != M.shape[0]:
        raise DimensionError(f"{M.shape[0]} training inputs but {t.size} targets")
    if not np.all(np.isfinite(t)):
        raise DataError("training targets contain non-finite values")
    return M, t


def fit(
    X: Sequence[Sequence[float]] | np.ndarray,
    y: Sequence[float] | np.ndarray,
    hp: HyperParams,
    *,
    jitter: float = DEFAULT_JITTER,
    feature_names: Sequence[str] = (),
    stats: StandardizationStats | None = None,
    target_mean: float = 0.0,
    log_features: Sequence[str] = (),
) -> TrainedModel:
    M, t = _validate_training(X, y)
    K = kernel_matrix(M, hp, with_noise=True)
    L, applied = cholesky_with_jitter(K, jitter)
    alpha = cho_solve((L, True), t, check_finite=False)
    return TrainedModel(
        X_train=M,
        y_train=t,
        hp=hp,
        chol_factor=L,
        alpha=alpha,
        jitter=applied,
        feature_names=tuple(feature_names),
        stats=stats,
        target_mean=float(target_mean),
        log_features=tuple(log_features),
    )


def _clamp_variance(var: np.ndarray) -> np.ndarray:
    if np.any(var < -NEGATIVE_VARIANCE_TOLERANCE):
        raise IllConditionedKernelError(
            f"predictive variance {float(var.min()):.3e} is negative beyond roundoff"
        )
    return np.maximum(var, 0.0)


def predict_batch(
    model: TrainedModel, X_star: Sequence[Sequence[float]] | np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Predictive means and variances (observation noise included) for each row."""
    A = as_feature_matrix(X_star)
    if A.shape[1] != model.dim:
        raise DimensionError(f"model expects {model.dim} features, got {A.shape[1]}")
    Ks = cross_kernel_matrix(A, model.X_train, model.hp)
    mean = Ks @ model.alpha
    V = solve_triangular(model.chol_factor, Ks.T, lower=True, check_finite=False)
    prior = np.einsum("ij,ij->i", A, A) + model.hp.nu
    var = prior + model.hp.sigma_n**2 - np.einsum("ij,ij->j", V, V)
    return mean, _clamp_variance(var)


def predict(model: TrainedModel, x_star: Sequence[float] | np.ndarray) -> Prediction:
    x = as_feature_vector(x_star)
    mean, var = predict_batch(model, x[np.newaxis, :])
    return Prediction(mean=float(mean[0]), variance=float(var[0]))


def log_marginal_likelihood(
    X: Sequence[Sequence[float]] | np.ndarray,
    y: Sequence[float] | np.ndarray,
    hp: HyperParams,
    *,
    jitter: float = DEFAULT_JITTER,
) -> float:
    M, t = _validate_training(X, y)
    K = kernel_matrix(M, hp, with_noise=True)
    L, _ = cholesky_with_jitter(K, jitter)
    alpha = cho_solve((L, True), t, check_finite=False)
    n = t.size
    return float(-0.5 * t @ alpha - np.log(np.diag(L)).sum() - 0.5 * n * _LOG_2PI)


__all__ = [
    "TrainedModel",
    "Prediction",
    "DEFAULT_JITTER",
    "cholesky_with_jitter",
    "fit",
    "predict",
    "predict_batch",
    "log_marginal_likelihood",
]
