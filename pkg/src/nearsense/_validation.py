"""Small input-validation helpers used across modules."""

from __future__ import annotations

import numpy as np

from .errors import DataError


def as_float_array(x, name: str = "array") -> np.ndarray:
    """Coerce to a float64 ndarray, rejecting non-finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def as_series(x, name: str = "series") -> np.ndarray:
    """Coerce to a finite 1-D float64 array."""
    arr = as_float_array(x, name)
    if arr.ndim != 1:
        raise DataError(f"{name} must be 1-D, got shape {arr.shape}")
    return arr


def as_xyz(x, name: str = "window values") -> np.ndarray:
    """Coerce to a finite (n, 3) float64 array of x/y/z readings."""
    arr = as_float_array(x, name)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DataError(f"{name} must have shape (n, 3), got {arr.shape}")
    return arr


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def check_feature_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce a 2-D feature matrix to float64 and reject non-finite rows."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr
