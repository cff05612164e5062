from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError


@dataclass(frozen=True, eq=False)
class Sample:
    """``n`` responses in ``R^d`` paired with curves sampled on ``p`` grid points.

    Attributes
    ----------
    x : ndarray, shape (n, d)
        Responses.
    y : ndarray, shape (n, p)
        Discretized functional covariates, one row per observation.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if y.ndim == 1:
            y = y[:, None]
        if x.ndim != 2 or y.ndim != 2:
            raise DimensionError("x and y must be 2-D arrays")
        if x.shape[0] != y.shape[0]:
            raise DimensionError(
                f"x has {x.shape[0]} rows but y has {y.shape[0]}")
        if x.shape[0] < 1 or y.shape[1] < 1:
            raise DimensionError("empty sample")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("sample contains non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def p(self) -> int:
        return self.y.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return (self.x.shape == other.x.shape and self.y.shape == other.y.shape
                and np.array_equal(self.x, other.x)
                and np.array_equal(self.y, other.y))

    def scaled(self, factor: float) -> "Sample":
        """Copy with every response multiplied by ``factor``."""
        return Sample(self.x * factor, self.y)
