import pytest

from utils.import_core import as_float, is_missing, norm_key, parse_bool, parse_strict_int


@pytest.mark.parametrize(
    ("raw", "expected"),
    [
        (" Sigma2 ", "sigma2"),
        ("Burn In", "burn_in"),
        ("grid-size", "grid_size"),
    ],
)
def test_norm_key(raw: str, expected: str) -> None:
    assert norm_key(raw) == expected


@pytest.mark.parametrize("token", ["", "  ", "NA", "n/a", "NaN", "null", "None", None])
def test_is_missing_recognizes_tokens(token) -> None:
    assert is_missing(token)


@pytest.mark.parametrize("token", ["0", "abc", "-", "0.0"])
def test_is_missing_rejects_values(token: str) -> None:
    assert not is_missing(token)


def test_as_float_rejects_parenthesized_and_non_finite_cells() -> None:
    assert as_float("(2.5)") is None
    assert as_float("-2.5") == -2.5
    assert as_float(" 1e-3 ") == pytest.approx(1e-3)
    assert as_float("inf") is None
    assert as_float("nan", 0.0) == 0.0
    assert as_float("text") is None


def test_parse_strict_int() -> None:
    assert parse_strict_int("12") == 12
    assert parse_strict_int("12.0") == 12
    assert parse_strict_int("12.5") is None
    assert parse_strict_int("x") is None


@pytest.mark.parametrize(
    ("raw", "expected"),
    [("true", True), ("Yes", True), ("1", True), ("off", False), ("0", False), ("maybe", None)],
)
def test_parse_bool(raw: str, expected: bool | None) -> None:
    assert parse_bool(raw) is expected
