import numpy as np
import pytest

from domain.errors import InvalidInputError
from domain.validation import (
    as_real_array,
    ensure_correlation,
    ensure_count,
    ensure_finite,
    ensure_nonnegative,
    ensure_open_unit,
    ensure_positive,
    ensure_same_length,
)


def test_as_real_array_returns_read_only_copy():
    source = [[1, 2], [3, 4]]
    array = as_real_array(source, "x", ndim=2)
    assert array.dtype == np.float64
    with pytest.raises(ValueError):
        array[0, 0] = 5.0


@pytest.mark.parametrize(
    ("value", "ndim"),
    [
        ([1.0, np.nan], 1),
        ([1.0, np.inf], 1),
        ([1.0, 2.0], 2),
        ("abc", 1),
    ],
)
def test_as_real_array_rejects(value, ndim):
    with pytest.raises(InvalidInputError):
        as_real_array(value, "x", ndim=ndim)


def test_scalar_guards():
    assert ensure_finite("1.5", "v") == 1.5
    assert ensure_nonnegative(0, "v") == 0.0
    assert ensure_positive(2, "v") == 2.0
    assert ensure_open_unit(0.95, "v") == 0.95
    assert ensure_correlation(-0.5, "v") == -0.5


@pytest.mark.parametrize(
    ("guard", "value"),
    [
        (ensure_finite, float("nan")),
        (ensure_nonnegative, -1e-12),
        (ensure_positive, 0.0),
        (ensure_open_unit, 1.0),
        (ensure_open_unit, 0.0),
        (ensure_correlation, 1.0),
        (ensure_correlation, -1.0),
    ],
)
def test_scalar_guards_reject(guard, value):
    with pytest.raises(InvalidInputError):
        guard(value, "v")


def test_ensure_count():
    assert ensure_count(3, "k") == 3
    assert ensure_count(3.0, "k") == 3
    assert ensure_count(5, "k", minimum=5) == 5
    with pytest.raises(InvalidInputError, match="integer"):
        ensure_count(2.5, "k")
    with pytest.raises(InvalidInputError, match="integer"):
        ensure_count(True, "k")
    with pytest.raises(InvalidInputError, match=">= 1"):
        ensure_count(0, "k", minimum=1)


def test_ensure_same_length():
    assert ensure_same_length("pair", [1, 2], (3, 4)) == 2
    with pytest.raises(InvalidInputError, match="length mismatch"):
        ensure_same_length("pair", [1], [1, 2])
