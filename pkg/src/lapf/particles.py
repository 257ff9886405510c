"""Weighted particle ensembles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ParticleSet:
    """A set of state hypotheses with normalized importance weights.

    ``states`` has shape (n_particles, state_dim); ``weights`` has shape
    (n_particles,), is nonnegative, and sums to 1 within ``WEIGHT_SUM_TOL``.
    """

    states: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if states.ndim != 2 or states.shape[0] < 1:
            raise InvalidInputError(f"states must be (N, n) with N >= 1, got {states.shape}")
        if weights.shape != (states.shape[0],):
            raise InvalidInputError("weights length must match particle count")
        if np.any(weights < 0):
            raise InvalidInputError("weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidInputError(f"weights must sum to 1, got {weights.sum()!r}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", weights)

    @property
    def n_particles(self) -> int:
        return self.states.shape[0]

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    def ess(self) -> float:
        """Effective sample size 1 / sum(w^2)."""
        return float(1.0 / np.sum(self.weights**2))


def uniform_weights(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)
