"""Worker-pool helper for independent, seeded tasks (standalone)."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import TypeVar

from joblib import Parallel, delayed

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[T], R], items: Sequence[T], *, workers: int = 1) -> list[R]:
    """Apply ``fn`` to every item, returning results in input order.

    Tasks carry their own seeds, so the output does not depend on ``workers``.
    Threads keep BLAS threading identical to a sequential run.
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return list(Parallel(n_jobs=workers, prefer="threads")(delayed(fn)(item) for item in items))
