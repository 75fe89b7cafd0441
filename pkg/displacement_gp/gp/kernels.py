"""Composite covariance: linear + ARD squared-exponential + observation noise.

    k(x_i, x_j) = x_iᵀx_j + ν·exp(-Σ_d γ_d (x_i^d - x_j^d)²) + σ_n² δ_ij

The noise term is applied exactly once: on the diagonal of the training
covariance (``with_noise=True``). Cross-covariances and the test-point
prior variance never include it.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import DataError, DimensionError


@dataclass(frozen=True)
class HyperParams:
    nu: float
    gamma: tuple[float, ...]
    sigma_n: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "sigma_n", float(self.sigma_n))
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise ValueError(f"nu must be a positive finite real, got {self.nu}")
        if not (math.isfinite(self.sigma_n) and self.sigma_n > 0):
            raise ValueError(f"sigma_n must be a positive finite real, got {self.sigma_n}")
        if any(not math.isfinite(g) or g < 0 for g in self.gamma):
            raise ValueError(f"gamma entries must be finite and non-negative, got {self.gamma}")

    @property
    def dim(self) -> int:
        return len(self.gamma)

    @property
    def gamma_array(self) -> np.ndarray:
        return np.asarray(self.gamma, dtype=float)

    def to_log10(self) -> np.ndarray:
        """Search coordinates: [log10 ν, log10 γ_1..γ_D, log10 σ_n].

        γ_d = 0 has no log; it maps to -inf and is only produced by callers
        who built the value by hand.
        """
        with np.errstate(divide="ignore"):
            return np.log10(np.concatenate([[self.nu], self.gamma_array, [self.sigma_n]]))

    @classmethod
    def from_log10(cls, theta: Sequence[float] | np.ndarray) -> HyperParams:
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or theta.size < 2:
            raise DimensionError(f"theta must be a vector of length D+2, got shape {theta.shape}")
        values = np.power(10.0, theta)
        return cls(nu=float(values[0]), gamma=tuple(values[1:-1].tolist()), sigma_n=float(values[-1]))

    def to_dict(self) -> dict[str, Any]:
        return {"nu": self.nu, "gamma": list(self.gamma), "sigma_n": self.sigma_n}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> HyperParams:
        return cls(nu=data["nu"], gamma=tuple(data["gamma"]), sigma_n=data["sigma_n"])


def as_feature_vector(x: Sequence[float] | np.ndarray) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"feature vector must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DataError("feature vector contains non-finite values")
    return v


def as_feature_matrix(X: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    M = np.asarray(X, dtype=float)
    if M.ndim == 1:
        M = M[:, np.newaxis]
    if M.ndim != 2:
        raise DimensionError(f"feature matrix must be 2-D, got shape {M.shape}")
    if M.shape[0] == 0:
        raise DimensionError("feature matrix is empty")
    if not np.all(np.isfinite(M)):
        raise DataError("feature matrix contains non-finite values")
    return M


def _check_pair(x_i: np.ndarray, x_j: np.ndarray) -> None:
    if x_i.shape != x_j.shape:
        raise DimensionError(f"feature vectors differ in length: {x_i.size} vs {x_j.size}")


def _check_hp(dim: int, hp: HyperParams) -> None:
    if hp.dim != dim:
        raise DimensionError(f"hyperparameters carry {hp.dim} gammas for {dim} features")


def linear_kernel(x_i: Sequence[float] | np.ndarray, x_j: Sequence[float] | np.ndarray) -> float:
    a, b = as_feature_vector(x_i), as_feature_vector(x_j)
    _check_pair(a, b)
    return float(a @ b)


def ard_kernel(
    x_i: Sequence[float] | np.ndarray, x_j: Sequence[float] | np.ndarray, hp: HyperParams
) -> float:
    a, b = as_feature_vector(x_i), as_feature_vector(x_j)
    _check_pair(a, b)
    _check_hp(a.size, hp)
    return float(hp.nu * np.exp(-np.sum(hp.gamma_array * (a - b) ** 2)))


def composite_kernel(
    x_i: Sequence[float] | np.ndarray,
    x_j: Sequence[float] | np.ndarray,
    hp: HyperParams,
    same_index: bool = False,
) -> float:
    value = linear_kernel(x_i, x_j) + ard_kernel(x_i, x_j, hp)
    if same_index:
        value += hp.sigma_n**2
    return value


def _weighted_sq_dist(A: np.ndarray, B: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    diff = A[:, np.newaxis, :] - B[np.newaxis, :, :]
    return np.einsum("ijd,d->ij", diff * diff, gamma)


def kernel_matrix(
    X: Sequence[Sequence[float]] | np.ndarray, hp: HyperParams, with_noise: bool = True
) -> np.ndarray:
    M = as_feature_matrix(X)
    _check_hp(M.shape[1], hp)
    K = M @ M.T + hp.nu * np.exp(-_weighted_sq_dist(M, M, hp.gamma_array))
    K = 0.5 * (K + K.T)
    if with_noise:
        K[np.diag_indices_from(K)] += hp.sigma_n**2
    return K


def cross_kernel_matrix(
    X_star: Sequence[Sequence[float]] | np.ndarray,
    X: Sequence[Sequence[float]] | np.ndarray,
    hp: HyperParams,
) -> np.ndarray:
    """Rows are test points, columns training points; never includes noise."""
    A, B = as_feature_matrix(X_star), as_feature_matrix(X)
    if A.shape[1] != B.shape[1]:
        raise DimensionError(f"test points have {A.shape[1]} features, training points {B.shape[1]}")
    _check_hp(B.shape[1], hp)
    return A @ B.T + hp.nu * np.exp(-_weighted_sq_dist(A, B, hp.gamma_array))


def cross_kernel_vector(
    x_star: Sequence[float] | np.ndarray,
    X: Sequence[Sequence[float]] | np.ndarray,
    hp: HyperParams,
) -> np.ndarray:
    x = as_feature_vector(x_star)
    return cross_kernel_matrix(x[np.newaxis, :], X, hp)[0]


def prior_variance(x_star: Sequence[float] | np.ndarray, hp: HyperParams) -> float:
    """k(x*, x*) without the noise term: x*ᵀx* + ν."""
    x = as_feature_vector(x_star)
    _check_hp(x.size, hp)
    return float(x @ x + hp.nu)


__all__ = [
    "HyperParams",
    "as_feature_vector",
    "as_feature_matrix",
    "linear_kernel",
    "ard_kernel",
    "composite_kernel",
    "kernel_matrix",
    "cross_kernel_matrix",
    "cross_kernel_vector",
    "prior_variance",
]
