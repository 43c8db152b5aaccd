"""Input validation helpers shared by the estimator and library entry points."""

from __future__ import annotations

import numpy as np

from .errors import InvalidDims


def as_float_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidDims(f"{name} must be 2-dimensional, got ndim={X.ndim}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidDims(f"{name} must be non-empty, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidDims(f"{name} holds non-finite values")
    return X


def as_float_vector(y, name: str = "y") -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size < 1:
        raise InvalidDims(f"{name} must be non-empty")
    if not np.all(np.isfinite(y)):
        raise InvalidDims(f"{name} holds non-finite values")
    return y


def check_design(X, y):
    """Validate a design/response pair and return float64 views."""
    X = as_float_matrix(X)
    y = as_float_vector(y)
    if y.shape[0] != X.shape[0]:
        raise InvalidDims(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
    return X, y
