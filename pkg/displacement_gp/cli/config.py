"""Config loading for displacement-gp defaults.

Supports a project-level TOML file. Priority: CLI > config file > code defaults.
"""

from __future__ import annotations

import logging
import tomllib
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from ..errors import DataError

logger = logging.getLogger(__name__)

CONFIG_NAMES = ("displacement-gp.toml", ".displacement-gp.toml")
SECTIONS = ("experiment", "bo", "bounds", "data")


def _find_project_root(start: Path) -> Path:
    cur = start.resolve()
    if cur.is_file():
        cur = cur.parent
    for p in [cur, *cur.parents]:
        if (p / ".git").exists() or (p / "pyproject.toml").exists():
            return p
    return cur


def _load_toml(path: Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"{path}: invalid TOML: {exc}") from exc


def discover_config(start: Path) -> Path | None:
    root = _find_project_root(start)
    for name in CONFIG_NAMES:
        candidate = root / name
        if candidate.exists():
            return candidate
    return None


def load_config(explicit: str | Path | None = None, *, start: Path | None = None) -> dict[str, Any]:
    """Read ``explicit`` (must exist) or discover a file next to the project root.

    Returns only the known sections, ``{}`` when nothing is found. A
    ``[displacement_gp]`` wrapper table is accepted as well.
    """
    if explicit is not None:
        path: Path | None = Path(explicit)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
    else:
        path = discover_config(start or Path.cwd())
    if path is None:
        return {}
    raw = _load_toml(path)
    cfg = raw.get("displacement_gp", raw)
    unknown = sorted(k for k in cfg if k not in SECTIONS)
    if unknown:
        logger.warning("config_unknown_sections", extra={"path": str(path), "sections": unknown})
    logger.info("config_loaded", extra={"path": str(path)})
    return {k: v for k, v in cfg.items() if k in SECTIONS and isinstance(v, dict)}


def pick(cli_val: Any, cfg: dict[str, Any], cfg_path: Sequence[str], default: Any) -> Any:
    """CLI value if given, else the config entry at ``cfg_path``, else ``default``."""
    if cli_val is not None:
        return cli_val
    cursor: Any = cfg
    for key in cfg_path:
        if not isinstance(cursor, dict) or key not in cursor:
            return default
        cursor = cursor[key]
    return cursor


__all__ = ["CONFIG_NAMES", "discover_config", "load_config", "pick"]
