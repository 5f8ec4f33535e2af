"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_float_matrix",
    "check_finite",
    "check_unit_rows",
    "unit_normalize",
]


def as_float_matrix(x, name: str = "array") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    check_finite(arr, name)
    return arr


def check_finite(arr: np.ndarray, name: str = "array") -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")


def check_unit_rows(arr: np.ndarray, name: str = "array", tol: float = 1e-6) -> None:
    norms = np.linalg.norm(arr, axis=-1)
    if not np.allclose(norms, 1.0, atol=tol):
        worst = float(np.max(np.abs(norms - 1.0)))
        raise ValueError(f"{name} rows are not unit-normalized (max deviation {worst:.3g})")


def unit_normalize(vec: np.ndarray, name: str = "vector") -> np.ndarray:
    """Return vec / ||vec||, rejecting (near-)zero vectors."""
    vec = np.asarray(vec, dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if not np.isfinite(norm) or norm < 1e-12:
        raise ValueError(f"{name} has zero or non-finite norm; cannot normalize")
    return vec / norm
