"""Array validation helpers used at every public entry point."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError


def as_float_matrix(values, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def as_float_vector(values, name: str = "vector") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_feature_matrix(features, name: str = "features") -> np.ndarray:
    """Validate an n x d feature matrix (finite, n >= 1, d >= 1)."""
    arr = as_float_matrix(features, name)
    n, d = arr.shape
    if n < 1 or d < 1:
        raise ValidationError(f"{name} must have n >= 1 and d >= 1, got {n} x {d}")
    return arr


def check_distance_matrix(dist, name: str = "distances") -> np.ndarray:
    """Validate a symmetric nonnegative distance matrix with a zero diagonal."""
    arr = as_float_matrix(dist, name)
    n, m = arr.shape
    if n != m:
        raise ValidationError(f"{name} must be square, got {n} x {m}")
    if np.any(arr < 0):
        raise ValidationError(f"{name} contains negative entries")
    if np.any(np.diagonal(arr) != 0.0):
        raise ValidationError(f"{name} diagonal must be exactly zero")
    if not np.array_equal(arr, arr.T):
        raise ValidationError(f"{name} must be symmetric")
    return arr


def check_transition_matrix(p, name: str = "transition matrix",
                            row_sum_tol: float = 1e-9) -> np.ndarray:
    """Validate a row-stochastic matrix within ``row_sum_tol``."""
    arr = as_float_matrix(p, name)
    n, m = arr.shape
    if n != m:
        raise ValidationError(f"{name} must be square, got {n} x {m}")
    if np.any(arr < 0):
        raise ValidationError(f"{name} contains negative entries")
    sums = arr.sum(axis=1)
    worst = float(np.abs(sums - 1.0).max())
    if worst > row_sum_tol:
        raise ValidationError(
            f"{name} rows must sum to 1 within {row_sum_tol:g}; worst deviation {worst:g}")
    return arr


def check_probability_rows(probs, name: str = "probabilities",
                           row_sum_tol: float = 1e-6) -> np.ndarray:
    """Validate a T x C matrix whose rows are probability vectors.

    Rows are rejected, never repaired: out-of-range entries or row sums off by
    more than ``row_sum_tol`` raise ValidationError.
    """
    arr = as_float_matrix(probs, name)
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name} must be non-empty, got shape {arr.shape}")
    if np.any(arr < 0):
        raise ValidationError(f"{name} contains negative entries")
    if np.any(arr > 1):
        raise ValidationError(f"{name} contains entries above 1")
    sums = arr.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > row_sum_tol)
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            f"{name} row {i} sums to {sums[i]!r}, off by more than {row_sum_tol:g}")
    return arr
