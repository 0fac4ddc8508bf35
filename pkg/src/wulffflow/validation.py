"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import numbers

import numpy as np

from .errors import ConfigError, DomainError

UNIT_TOL = 1e-12


def as_float_array(x, *, name: str = "x", ndim_min: int = 0) -> np.ndarray:
    """Convert ``x`` to a finite float64 array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim < ndim_min:
        raise DomainError(f"{name} must have at least {ndim_min} dimension(s)")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def check_vectors(x, dim: int, *, name: str = "x") -> np.ndarray:
    """Return ``x`` as an array whose last axis has length ``dim``."""
    arr = as_float_array(x, name=name, ndim_min=1)
    if arr.shape[-1] != dim:
        raise DomainError(f"{name} must have last dimension {dim}, got {arr.shape[-1]}")
    return arr


def check_unit_vectors(x, dim: int, *, name: str = "x", tol: float = UNIT_TOL) -> np.ndarray:
    """Validate that every vector in ``x`` has unit Euclidean length."""
    arr = check_vectors(x, dim, name=name)
    err = np.abs(np.linalg.norm(arr, axis=-1) - 1.0)
    if np.any(err > tol):
        raise DomainError(f"{name} must be unit vectors (max |1-|x|| = {err.max():.3e})")
    return arr


def check_nonzero_vectors(x, dim: int, *, name: str = "z") -> np.ndarray:
    arr = check_vectors(x, dim, name=name)
    if np.any(np.linalg.norm(arr, axis=-1) == 0.0):
        raise DomainError(f"{name} must be nonzero")
    return arr


def check_int(value, *, name: str, low: int | None = None, high: int | None = None,
              error=ConfigError) -> int:
    """Validate an integer parameter with optional inclusive bounds."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise error(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if low is not None and value < low:
        raise error(f"{name} must be >= {low}, got {value}")
    if high is not None and value > high:
        raise error(f"{name} must be <= {high}, got {value}")
    return value


def check_positive(value, *, name: str, error=ConfigError) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise error(f"{name} must be a number, got {value!r}") from None
    if not np.isfinite(value) or value <= 0:
        raise error(f"{name} must be positive and finite, got {value}")
    return value


def check_field(grid, values, *, name: str = "field") -> np.ndarray:
    """Validate a scalar field against a grid's node layout."""
    arr = as_float_array(values, name=name)
    if arr.shape != grid.shape:
        raise DomainError(f"{name} has shape {arr.shape}, grid expects {grid.shape}")
    return arr
