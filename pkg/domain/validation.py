import math
from collections.abc import Sequence

import numpy as np

from .errors import InvalidInputError


def as_real_array(value, name: str, *, ndim: int) -> np.ndarray:
    """Return a read-only float64 copy of ``value`` with finite entries."""
    try:
        array = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} must be numeric") from exc
    if array.ndim != ndim:
        raise InvalidInputError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{name} contains non-finite values")
    array.setflags(write=False)
    return array


def ensure_finite(value: float, name: str) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} must be a real number") from exc
    if not math.isfinite(number):
        raise InvalidInputError(f"{name} must be finite")
    return number


def ensure_nonnegative(value: float, name: str) -> float:
    number = ensure_finite(value, name)
    if number < 0:
        raise InvalidInputError(f"{name} must be >= 0, got {number}")
    return number


def ensure_positive(value: float, name: str) -> float:
    number = ensure_finite(value, name)
    if number <= 0:
        raise InvalidInputError(f"{name} must be > 0, got {number}")
    return number


def ensure_open_unit(value: float, name: str) -> float:
    number = ensure_finite(value, name)
    if not 0.0 < number < 1.0:
        raise InvalidInputError(f"{name} must lie strictly inside (0, 1), got {number}")
    return number


def ensure_correlation(value: float, name: str) -> float:
    number = ensure_finite(value, name)
    if not -1.0 < number < 1.0:
        raise InvalidInputError(f"|{name}| must be < 1, got {number}")
    return number


def ensure_count(value: int, name: str, *, minimum: int = 0) -> int:
    if isinstance(value, bool):
        raise InvalidInputError(f"{name} must be an integer")
    try:
        integer = int(value)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} must be an integer") from exc
    if integer != value:
        raise InvalidInputError(f"{name} must be an integer, got {value}")
    if integer < minimum:
        raise InvalidInputError(f"{name} must be >= {minimum}, got {integer}")
    return integer


def ensure_same_length(name: str, *sequences: Sequence) -> int:
    lengths = {len(sequence) for sequence in sequences}
    if len(lengths) != 1:
        raise InvalidInputError(f"{name}: length mismatch {sorted(lengths)}")
    return lengths.pop()
