"""Input validation helpers shared by the estimators and functional API."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .errors import MissingValues


def check_series(series, name="series", allow_nan=False):
    """Return ``series`` as a contiguous 1-D float64 array.

    Raises
    ------
    MissingValues
        If the series contains NaN and ``allow_nan`` is false.
    ValueError
        If the input is not one-dimensional or contains infinities.
    """
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if np.isinf(arr).any():
        raise ValueError(f"{name} contains infinite values")
    if not allow_nan and np.isnan(arr).any():
        raise MissingValues(f"{name} contains {int(np.isnan(arr).sum())} missing value(s)")
    return np.ascontiguousarray(arr)


def check_paired_series(x, y):
    x = check_series(x, "x")
    y = check_series(y, "y")
    if x.shape != y.shape:
        raise ValueError(f"series lengths differ: {x.shape[0]} != {y.shape[0]}")
    return x, y


def check_matrix(X, name="X"):
    return check_array(X, dtype=np.float64, ensure_2d=True, input_name=name)


def check_fraction(value, name, low_open=True, high_open=False):
    """Validate that ``value`` lies in the unit interval with the given openness."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    lo_ok = value > 0.0 if low_open else value >= 0.0
    hi_ok = value < 1.0 if high_open else value <= 1.0
    if not (lo_ok and hi_ok):
        lo = "(" if low_open else "["
        hi = ")" if high_open else "]"
        raise ValueError(f"{name} must lie in {lo}0, 1{hi}, got {value}")
    return value


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_random_state(seed):
    """Return a ``numpy.random.Generator`` for ``seed``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
