from __future__ import annotations

import shutil
from collections.abc import Generator
from pathlib import Path
from uuid import uuid4

import numpy as np
import pytest

from domain.windows import ObservationWindow

_LOCAL_TMP_ROOT = Path(__file__).resolve().parent / "_tmp"
_LOCAL_TMP_ROOT.mkdir(exist_ok=True)


@pytest.fixture
def tmp_path() -> Generator[Path, None, None]:
    path = _LOCAL_TMP_ROOT / f"pytest-{uuid4().hex}"
    path.mkdir()
    try:
        yield path
    finally:
        shutil.rmtree(path, ignore_errors=True)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture
def small_window(rng: np.random.Generator) -> ObservationWindow:
    """Forty rows, six predictors, three of them carrying signal."""
    predictors = rng.standard_normal((40, 6))
    coefficients = np.array([1.2, -0.8, 0.5, 0.0, 0.0, 0.0])
    responses = predictors @ coefficients + 0.5 * rng.standard_normal(40)
    return ObservationWindow.unit(predictors, responses)
