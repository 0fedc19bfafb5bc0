from __future__ import annotations

from dataclasses import dataclass, field

from config import (
    DEFAULT_BURN_IN,
    DEFAULT_FORGETTING,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    DEFAULT_WINDOW,
)

from .errors import InvalidInputError
from .grids import LambdaGrid
from .policies import StreamMethod, WindowWeighting
from .rap_state import RapConfig
from .validation import ensure_count, ensure_open_unit, ensure_positive


@dataclass(frozen=True)
class StreamConfig:
    """How one stream is tracked: method, window, burn-in, grid and solver settings."""

    method: StreamMethod = StreamMethod.BIC_WINDOW
    window_length: int = DEFAULT_WINDOW
    burn_in: int = DEFAULT_BURN_IN
    grid: LambdaGrid = field(default_factory=LambdaGrid.relative)
    rap: RapConfig = field(default_factory=RapConfig)
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    weighting: WindowWeighting = WindowWeighting.RECTANGULAR
    window_forgetting: float = DEFAULT_FORGETTING

    def __post_init__(self) -> None:
        method = StreamMethod(self.method)
        window = ensure_count(self.window_length, "window_length", minimum=2)
        burn_in = ensure_count(self.burn_in, "burn_in", minimum=2)
        if method.is_windowed and burn_in < window:
            raise InvalidInputError(
                f"burn_in ({burn_in}) must be >= window_length ({window}) for windowed methods"
            )
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "window_length", window)
        object.__setattr__(self, "burn_in", burn_in)
        object.__setattr__(self, "weighting", WindowWeighting(self.weighting))
        object.__setattr__(
            self, "window_forgetting", ensure_open_unit(self.window_forgetting, "window_forgetting")
        )
        object.__setattr__(self, "tol", ensure_positive(self.tol, "tol"))
        object.__setattr__(self, "max_iter", ensure_count(self.max_iter, "max_iter", minimum=1))
