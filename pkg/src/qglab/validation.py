"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""
from __future__ import annotations

import numbers

import numpy as np

from .exceptions import NotHermitianError, NotUnitaryError, ParameterOutOfRangeError


def check_square(X, name="X"):
    """Return ``X`` as a finite complex square matrix."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {X.shape}")
    X = X.astype(complex, copy=False)
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


def check_matrix_stack(X, n=None, name="X"):
    """Return ``X`` as a complex array of shape ``(k, n, n)``.

    A single matrix is promoted to a stack of one. An empty sequence is
    accepted when ``n`` is given.
    """
    if isinstance(X, (list, tuple)) and len(X) == 0:
        if n is None:
            raise ValueError(f"cannot infer matrix size from empty {name}")
        return np.zeros((0, n, n), dtype=complex)
    X = np.asarray(X)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise ValueError(f"{name} must have shape (k, n, n), got {X.shape}")
    if n is not None and X.shape[1] != n and X.shape[0] > 0:
        raise ValueError(f"{name} has matrices of size {X.shape[1]}, expected {n}")
    X = X.astype(complex, copy=False)
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


def hermitian_defect(X):
    return float(np.linalg.norm(X - X.conj().T))


def check_hermitian(X, rel_tol=1e-10, name="X"):
    """Validate ``X = X*`` within ``rel_tol * ||X||_F``."""
    X = check_square(X, name)
    scale = max(np.linalg.norm(X), 1.0)
    if hermitian_defect(X) > rel_tol * scale:
        raise NotHermitianError(f"{name} is not Hermitian (defect {hermitian_defect(X):.3g})")
    return X


def check_unitary(U, tol=1e-9, name="U"):
    U = check_square(U, name)
    defect = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
    if defect > tol * U.shape[0]:
        raise NotUnitaryError(f"{name} is not unitary (defect {defect:.3g})")
    return U


def check_size(n, name="n", minimum=1):
    if not isinstance(n, numbers.Integral) or isinstance(n, bool) or n < minimum:
        raise ParameterOutOfRangeError(f"{name} must be an integer >= {minimum}, got {n!r}")
    return int(n)


def check_probability(p, name="p", open_interval=False):
    if not isinstance(p, numbers.Real) or not np.isfinite(p):
        raise ParameterOutOfRangeError(f"{name} must be a real number, got {p!r}")
    if open_interval and not 0.0 < p < 1.0:
        raise ParameterOutOfRangeError(f"{name} must lie in (0, 1), got {p}")
    if not 0.0 <= p <= 1.0:
        raise ParameterOutOfRangeError(f"{name} must lie in [0, 1], got {p}")
    return float(p)
