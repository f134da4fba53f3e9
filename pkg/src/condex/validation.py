"""Small input-validation helpers used across the public API."""

from __future__ import annotations

import numpy as np


def as_float_vector(x, name="x"):
    """Coerce to a contiguous 1-d float64 array; scalars become length-1."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def as_float_matrix(x, name="X"):
    """Coerce to a 2-d float64 array; a list of vectors stacks to rows."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def check_square(a, name="A"):
    a = as_float_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def check_same_dim(x, x2, name="x", name2="x2"):
    if x.shape[-1] != x2.shape[-1]:
        raise ValueError(
            f"dimension mismatch: {name} has {x.shape[-1]}, {name2} has {x2.shape[-1]}"
        )


def check_positive(value, name):
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return float(value)


def check_nonnegative(value, name):
    if not value >= 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return float(value)
