"""Input checks shared by the functional API and the estimator classes."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import EmptyInput, InvalidInput


def check_correspondences(X):
    """Return ``X`` as a finite float ``(n, 4)`` array with ``n >= 1``.

    A single row of four numbers is accepted and promoted to shape ``(1, 4)``.
    """
    arr = np.asarray(X, dtype=float) if not hasattr(X, "iloc") else X
    if np.ndim(arr) == 1 and np.shape(arr)[0] == 4:
        arr = np.reshape(arr, (1, 4))
    if np.size(arr) == 0:
        raise EmptyInput("no correspondences given")
    try:
        arr = check_array(arr, dtype=np.float64, ensure_2d=True)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    if arr.shape[1] != 4:
        raise InvalidInput(f"correspondences need 4 columns (x, y, x', y'), got {arr.shape[1]}")
    return arr


def check_points(P):
    """Return ``P`` as a finite float ``(n, 3)`` array of scene points."""
    arr = np.asarray(P, dtype=float)
    if arr.ndim == 1 and arr.shape[0] == 3:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InvalidInput(f"scene points need shape (n, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("scene points must be finite")
    return arr
