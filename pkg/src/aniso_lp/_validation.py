"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np

from .exceptions import DomainError, ShapeError


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise DomainError(f"{name} must be a finite real number, got {value!r}")
    if strict and value <= 0:
        raise DomainError(f"{name} must be > 0, got {value}")
    if not strict and value < 0:
        raise DomainError(f"{name} must be >= 0, got {value}")
    return float(value)


def check_exponent(p):
    """Validate a Lebesgue exponent p in (1, inf)."""
    if not isinstance(p, numbers.Real) or not np.isfinite(p) or p <= 1:
        raise DomainError(f"p must lie in (1, inf), got {p!r}")
    return float(p)


def check_eps(eps):
    if not isinstance(eps, numbers.Real) or not 0 < eps < 0.5:
        raise DomainError(f"eps must lie in (0, 1/2), got {eps!r}")
    return float(eps)


def check_vectors(x, dim):
    """Return ``x`` as a float array whose last axis has length ``dim``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 and dim == 1:
        x = x.reshape(1)
    if x.shape[-1:] != (dim,):
        raise ShapeError(f"expected vectors with last axis {dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("vectors must have finite entries")
    return x


def check_field_batch(X, grid, allow_complex=True):
    """Validate a stack of field samples laid out as ``(n_samples, *grid.points)``.

    A single field with shape ``grid.points`` is promoted to a batch of one.

    Returns
    -------
    ndarray
        Float or complex array with a leading sample axis.
    """
    X = np.asarray(X)
    if X.dtype.kind not in "fciub":
        raise ShapeError(f"field samples must be numeric, got dtype {X.dtype}")
    if X.dtype.kind == "c":
        if not allow_complex:
            raise ShapeError("complex samples are not accepted here")
        X = X.astype(complex, copy=False)
    else:
        X = X.astype(float, copy=False)
    pts = tuple(grid.points)
    if X.shape == pts:
        X = X[np.newaxis]
    if X.shape[1:] != pts:
        raise ShapeError(f"expected samples of shape (n, {', '.join(map(str, pts))}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError("field samples must be finite")
    return X
