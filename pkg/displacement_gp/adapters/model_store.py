"""JSON persistence for trained models.

Only the training inputs, hyperparameters and preprocessing state are
stored; the Cholesky factor is recomputed on load.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from ..data.pipeline import StandardizationStats
from ..errors import DataError
from ..gp.core import TrainedModel, fit
from ..gp.kernels import HyperParams

logger = logging.getLogger(__name__)

FORMAT = "displacement-gp-model"
FORMAT_VERSION = 1


def model_to_dict(model: TrainedModel, *, metadata: dict[str, Any] | None = None) -> dict[str, Any]:
    return {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "hyperparameters": model.hp.to_dict(),
        "feature_names": list(model.feature_names),
        "target_mean": model.target_mean,
        "log_features": list(model.log_features),
        "jitter": model.jitter,
        "stats": model.stats.to_dict() if model.stats is not None else None,
        "X_train": model.X_train.tolist(),
        "y_train": model.y_train.tolist(),
        "metadata": metadata or {},
    }


def model_from_dict(data: dict[str, Any]) -> TrainedModel:
    if data.get("format") != FORMAT:
        raise DataError(f"not a model file (format={data.get('format')!r})")
    if data.get("version") != FORMAT_VERSION:
        raise DataError(f"unsupported model version {data.get('version')!r}")
    try:
        hp = HyperParams.from_dict(data["hyperparameters"])
        stats = StandardizationStats.from_dict(data["stats"]) if data.get("stats") else None
        X = np.asarray(data["X_train"], dtype=float)
        y = np.asarray(data["y_train"], dtype=float)
        log_features = tuple(str(n) for n in data["log_features"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed model file: {exc}") from exc
    return fit(
        X,
        y,
        hp,
        feature_names=tuple(data.get("feature_names", ())),
        stats=stats,
        target_mean=float(data.get("target_mean", 0.0)),
        log_features=log_features,
    )


def save_model(model: TrainedModel, path: str | Path, *, metadata: dict[str, Any] | None = None) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(model_to_dict(model, metadata=metadata), f, indent=2)
        f.write("\n")
    logger.info("model_saved", extra={"path": str(out), "n_train": model.n_train})
    return out


def load_model(path: str | Path) -> TrainedModel:
    src = Path(path)
    try:
        with open(src, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise DataError(f"{src}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"{src}: model file must hold a JSON object")
    model = model_from_dict(data)
    logger.info("model_loaded", extra={"path": str(src), "n_train": model.n_train})
    return model


__all__ = ["FORMAT_VERSION", "model_to_dict", "model_from_dict", "save_model", "load_model"]
