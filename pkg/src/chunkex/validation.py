"""Input validation helpers used across modules and by the estimator facade."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyQuery


def check_nonempty_text(text: str, *, error: type[Exception] = EmptyQuery) -> str:
    """Return ``text`` unchanged, raising ``error`` if it is blank."""
    if not isinstance(text, str) or not text.strip():
        raise error("text must be a non-empty string")
    return text


def check_vector(values: Sequence[float] | np.ndarray, dim: int | None = None) -> np.ndarray:
    """Coerce to a 1-D float64 array with finite entries, optionally of ``dim``."""
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ValueError("vector contains non-finite entries")
    if dim is not None and vec.shape[0] != dim:
        raise DimensionMismatch(dim, vec.shape[0])
    return vec


def check_positive_int(value: int, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return value


def check_k_values(k_values: Iterable[int]) -> tuple[int, ...]:
    """Validate a k list: non-empty, positive, strictly ascending."""
    ks = tuple(k_values)
    if not ks:
        raise ValueError("k list must be non-empty")
    for k in ks:
        check_positive_int(k, "k")
    if any(a >= b for a, b in zip(ks, ks[1:])):
        raise ValueError(f"k list must be sorted strictly ascending, got {ks}")
    return ks


def check_case_ids(case_ids: Iterable[int]) -> tuple[int, ...]:
    """Validate passage-composition case ids (each must be in 1..7)."""
    ids = tuple(case_ids)
    if not ids:
        raise ValueError("case list must be non-empty")
    bad = [c for c in ids if c not in range(1, 8)]
    if bad:
        raise ValueError(f"unknown case ids: {bad}; valid ids are 1..7")
    return ids
