"""Composite-kernel Gaussian process: kernels and exact inference."""

from .core import Prediction, TrainedModel, fit, log_marginal_likelihood, predict, predict_batch
from .kernels import HyperParams, composite_kernel, cross_kernel_vector, kernel_matrix

__all__ = [
    "HyperParams",
    "Prediction",
    "TrainedModel",
    "composite_kernel",
    "cross_kernel_vector",
    "fit",
    "kernel_matrix",
    "log_marginal_likelihood",
    "predict",
    "predict_batch",
]
