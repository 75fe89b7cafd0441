"""Derivative-free Type-II maximum likelihood.

Bayesian optimization over log10 hyperparameters: Latin-hypercube start,
then propose/evaluate cycles driven by expected improvement under an
isotropic squared-exponential surrogate fitted to the normal scores of the
objectives. Candidates mix perturbations of the incumbent with uniform
draws. A failed Cholesky scores -inf. ``random_search`` is the
equal-budget baseline.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky
from scipy.spatial.distance import cdist
from scipy.stats import norm, rankdata

from ..errors import IllConditionedKernelError, OptimizationFailedError
from ..gp.core import log_marginal_likelihood
from ..gp.kernels import HyperParams
from ..utils.parallel import map_ordered
from .space import BOConfig, EvaluationRecord, SearchSpace, best_record, initial_design

logger = logging.getLogger(__name__)

# lengthscales are multiples of sqrt(dim), the unit-cube diagonal
_LENGTHSCALE_GRID = (0.15, 0.25, 0.35, 0.5, 0.75, 1.0, 1.5)
_NOISE_RATIO_GRID = (1e-4, 1e-3, 1e-2, 1e-1)
_LOCAL_FRACTION = 0.8
_LOCAL_STEPS = (0.2, 0.05, 0.01)
_LOCAL_COORDS = 3.0


def expected_improvement(mu, sigma, best: float):
    """EI for maximization; scalar in, float out, arrays in, array out."""
    mu_a = np.asarray(mu, dtype=float)
    sigma_a = np.asarray(sigma, dtype=float)
    if np.any(sigma_a < 0):
        raise ValueError("sigma must be non-negative")
    gain = mu_a - best
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma_a > 0, gain / np.where(sigma_a > 0, sigma_a, 1.0), 0.0)
        ei = gain * norm.cdf(z) + sigma_a * norm.pdf(z)
    ei = np.where(sigma_a > 0, np.maximum(ei, 0.0), np.maximum(gain, 0.0))
    if ei.ndim == 0:
        return float(ei)
    return ei


@dataclass(frozen=True, eq=False)
class _Surrogate:
    U: np.ndarray
    L: np.ndarray
    alpha: np.ndarray
    lengthscale: float
    amplitude: float
    noise_ratio: float

    def predict(self, U_star: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Latent mean and standard deviation, in normal-score units."""
        Ks = self.amplitude * np.exp(-0.5 * cdist(U_star, self.U, "sqeuclidean") / self.lengthscale**2)
        mean = Ks @ self.alpha
        V = cho_solve((self.L, True), Ks.T, check_finite=False)
        var = self.amplitude - np.einsum("ij,ji->i", Ks, V)
        return mean, np.sqrt(np.maximum(var, 0.0))


def _normal_scores(objectives: np.ndarray) -> np.ndarray:
    """Rank-based Gaussianization; ties share their average rank."""
    n = objectives.size
    return norm.ppf((rankdata(objectives) - 0.5) / n)


def _fit_surrogate(U: np.ndarray, objectives: np.ndarray) -> _Surrogate:
    """Isotropic SE GP on unit-cube inputs; lengthscale and noise ratio by grid ML.

    Targets are the normal scores of ``objectives``, so a few very poor
    evaluations cannot dominate the fit. The amplitude is profiled in
    closed form for each grid cell; a flat history keeps unit amplitude.
    """
    t = _normal_scores(np.asarray(objectives, dtype=float))
    n, p = U.shape
    D2 = cdist(U, U, "sqeuclidean")
    eye = np.eye(n)
    best: tuple[float, float, float, float, np.ndarray, np.ndarray] | None = None
    for rel in _LENGTHSCALE_GRID:
        ell = rel * math.sqrt(p)
        R = np.exp(-0.5 * D2 / ell**2)
        for lam in _NOISE_RATIO_GRID:
            try:
                L = cholesky(R + (lam + 1e-10) * eye, lower=True, check_finite=False)
            except LinAlgError:
                continue
            a = cho_solve((L, True), t, check_finite=False)
            amp = float(t @ a) / n
            if not amp > 1e-12:
                amp = 1.0
            lml = -0.5 * n * math.log(amp) - np.log(np.diag(L)).sum()
            if best is None or lml > best[0]:
                best = (lml, ell, lam, amp, L, a)
    if best is None:
        raise OptimizationFailedError("surrogate kernel is singular for every grid setting")
    _, ell, lam, amp, L, a = best
    # K = amp·(R + λI); alpha in K-space is a/amp, factor scales by sqrt(amp)
    return _Surrogate(
        U=U,
        L=L * math.sqrt(amp),
        alpha=a / amp,
        lengthscale=ell,
        amplitude=amp,
        noise_ratio=lam,
    )


def _candidate_pool(space: SearchSpace, center: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` candidates: perturbations of ``center`` (unit-cube coordinates), then uniform draws.

    Each perturbation moves a random subset of coordinates (about three,
    never none) by a Gaussian step of one of ``_LOCAL_STEPS``.
    """
    n_local = int(round(_LOCAL_FRACTION * size))
    p = space.dim
    steps = rng.choice(_LOCAL_STEPS, size=(n_local, 1))
    mask = rng.random((n_local, p)) < min(1.0, _LOCAL_COORDS / p)
    mask[np.arange(n_local), rng.integers(0, p, size=n_local)] = True
    local = np.clip(center + mask * steps * rng.standard_normal((n_local, p)), 0.0, 1.0)
    uniform = rng.random((size - n_local, p))
    return space.from_unit(np.vstack([local, uniform]))


def propose_next(
    history: Sequence[EvaluationRecord],
    space: SearchSpace,
    config: BOConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """EI maximizer over the candidate pool.

    Improvement is measured against the surrogate's best mean at an
    evaluated point.
    """
    if not history:
        raise ValueError("propose_next needs at least one evaluated point")
    finite = [r for r in history if r.is_finite]
    if not finite:
        logger.debug("surrogate_skipped_no_finite_history")
        return space.sample_uniform(1, rng)[0]
    U = space.to_unit(np.array([r.theta_log for r in finite]))
    y = np.array([r.objective for r in finite])
    candidates = _candidate_pool(space, U[int(np.argmax(y))], config.candidate_pool_size, rng)
    surrogate = _fit_surrogate(U, y)
    incumbent = float(surrogate.predict(U)[0].max())
    mu, sd = surrogate.predict(space.to_unit(candidates))
    ei = expected_improvement(mu, sd, incumbent)
    return candidates[int(np.argmax(ei))]


def evaluate_theta(X: np.ndarray, y: np.ndarray, theta_log: np.ndarray) -> EvaluationRecord:
    theta = tuple(float(v) for v in theta_log)
    try:
        value = log_marginal_likelihood(X, y, HyperParams.from_log10(theta))
    except IllConditionedKernelError as exc:
        logger.debug("objective_failed", extra={"theta_log": theta, "error": str(exc)})
        value = -math.inf
    if not math.isfinite(value):
        value = -math.inf
    return EvaluationRecord(theta_log=theta, objective=value)


def _evaluate_batch(X: np.ndarray, y: np.ndarray, thetas: np.ndarray, n_jobs: int) -> list[EvaluationRecord]:
    return map_ordered(lambda th: evaluate_theta(X, y, th), list(thetas), workers=n_jobs)


def _select(records: list[EvaluationRecord]) -> tuple[HyperParams, list[EvaluationRecord]]:
    best = best_record(records)
    if best is None:
        raise OptimizationFailedError(f"all {len(records)} evaluations failed (kernel never positive definite)")
    return HyperParams.from_log10(best.theta_log), records


def _check_space(X: np.ndarray, space: SearchSpace) -> None:
    if space.dim != X.shape[1] + 2:
        raise ValueError(f"search space has {space.dim} coordinates, expected D+2 = {X.shape[1] + 2}")


def optimize_hyperparameters(
    X: np.ndarray,
    y: np.ndarray,
    space: SearchSpace,
    config: BOConfig,
) -> tuple[HyperParams, list[EvaluationRecord]]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_space(X, space)
    config = config.resolved(X.shape[1])
    rng = np.random.default_rng(config.seed)
    design = initial_design(space, int(config.initial_design_size or 1), rng)
    history = _evaluate_batch(X, y, design, config.n_jobs)
    best = best_record(history)
    logger.info(
        "bo_initial_design",
        extra={"size": len(history), "best": best.objective if best else None, "seed": config.seed},
    )
    for it in range(config.iterations):
        theta = propose_next(history, space, config, rng)
        record = evaluate_theta(X, y, theta)
        history.append(record)
        if record.is_finite and (best is None or record.objective > best.objective):
            best = record
            logger.debug("bo_improved", extra={"iteration": it, "objective": record.objective})
    logger.info(
        "bo_finished",
        extra={"evaluations": len(history), "best": best.objective if best else None},
    )
    return _select(history)


def random_search(
    X: np.ndarray,
    y: np.ndarray,
    space: SearchSpace,
    budget: int,
    seed: int,
    *,
    n_jobs: int = 1,
) -> tuple[HyperParams, list[EvaluationRecord]]:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_space(X, space)
    rng = np.random.default_rng(seed)
    records = _evaluate_batch(X, y, space.sample_uniform(budget, rng), n_jobs)
    return _select(records)


__all__ = [
    "expected_improvement",
    "propose_next",
    "evaluate_theta",
    "optimize_hyperparameters",
    "random_search",
]
