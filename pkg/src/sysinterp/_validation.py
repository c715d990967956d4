"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

from .exceptions import InvalidArgumentError


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise InvalidArgumentError(f"{name} must be a positive finite real, got {value!r}")
    return float(value)


def check_degree(N, name="N"):
    if isinstance(N, bool) or not isinstance(N, numbers.Integral) or N < 1:
        raise InvalidArgumentError(f"{name} must be an integer >= 1, got {N!r}")
    return int(N)


def check_matrix(M, name, shape=None):
    """Return ``M`` as a finite 2-D float array, optionally checking its shape.

    Entries of ``shape`` set to ``None`` are not checked.
    """
    arr = np.asarray(M, dtype=float)
    if arr.ndim == 1 and shape is not None and len(shape) == 2 and shape[1] == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    if shape is not None:
        for axis, (want, got) in enumerate(zip(shape, arr.shape)):
            if want is not None and want != got:
                raise InvalidArgumentError(
                    f"{name} has shape {arr.shape}, expected {shape} (axis {axis})"
                )
    return arr


def check_vector(v, name, size=None):
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    if size is not None and arr.shape[0] != size:
        raise InvalidArgumentError(f"{name} has length {arr.shape[0]}, expected {size}")
    return arr


def check_sequence(values, name, width=None, min_length=1):
    """Return a ``(length, width)`` array from a sequence of vectors."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if width in (None, 1) else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{name} must be a sequence of vectors, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    if width is not None and arr.shape[1] != width:
        raise InvalidArgumentError(f"{name} has vectors of size {arr.shape[1]}, expected {width}")
    if arr.shape[0] < min_length:
        raise InvalidArgumentError(f"{name} needs at least {min_length} entries")
    return arr
