"""Partition of a value range into ordered quantization intervals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .validation import as_vector


@dataclass(frozen=True)
class QuantizationScheme:
    """Ascending boundaries b_0 < ... < b_m partitioning [b_0, b_m].

    Interval i (1-based) is [b_{i-1}, b_i) for i < m and [b_{m-1}, b_m] for
    the last one, so the whole range is covered exactly once.
    """

    boundaries: np.ndarray

    def __post_init__(self):
        b = as_vector(self.boundaries, "boundaries").copy()
        if b.shape[0] < 2:
            raise ConfigurationError("need at least two boundaries")
        if np.any(np.diff(b) <= 0):
            raise ConfigurationError("boundaries must be strictly ascending")
        b.flags.writeable = False
        object.__setattr__(self, "boundaries", b)

    @classmethod
    def equal(cls, lo: float, hi: float, m: int) -> "QuantizationScheme":
        """m equal-width intervals over [lo, hi]."""
        if m < 1:
            raise ConfigurationError(f"m must be >= 1, got {m}")
        return cls(boundaries=np.linspace(lo, hi, m + 1))

    @property
    def lo(self) -> float:
        return float(self.boundaries[0])

    @property
    def hi(self) -> float:
        return float(self.boundaries[-1])

    @property
    def m(self) -> int:
        return self.boundaries.shape[0] - 1

    def contains(self, y: float) -> bool:
        return self.lo <= y <= self.hi


def quantize(scheme: QuantizationScheme, y: float) -> int:
    """Return the 1-based index of the interval containing y.

    y must already lie inside the scheme's range; callers clamp first.
    """
    if not np.isfinite(y) or not scheme.contains(y):
        raise InvalidInputError(f"value {y!r} outside range [{scheme.lo}, {scheme.hi}]")
    label = int(np.searchsorted(scheme.boundaries, y, side="right"))
    return min(label, scheme.m)  # y == hi belongs to the closed last interval
