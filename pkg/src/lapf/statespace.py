"""Plant dynamics: linear transition, additive Gaussian noise, box projection."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .particles import ParticleSet
from .validation import as_matrix, as_vector


@dataclass(frozen=True)
class GaussianSpec:
    """A diagonal-covariance Gaussian, used for noise terms and priors.

    Zero variances are allowed so noise can be switched off in tests and
    deterministic runs.
    """

    mean: np.ndarray
    cov_diag: np.ndarray

    def __post_init__(self):
        mean = as_vector(self.mean, "mean")
        cov = as_vector(self.cov_diag, "cov_diag", length=mean.shape[0])
        if np.any(cov < 0):
            raise ConfigurationError("cov_diag entries must be >= 0")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov_diag", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        std = np.sqrt(self.cov_diag)
        if size is None:
            return self.mean + std * rng.standard_normal(self.dim)
        return self.mean + std * rng.standard_normal((size, self.dim))


@dataclass(frozen=True)
class PlantModel:
    """Discrete-time plant: x_k = proj(A x_{k-1} + w_k), w_k ~ N(u, diag(q)).

    The projection clamps every component into ``clamp`` (closed on both
    ends).
    """

    transition: np.ndarray
    noise_mean: np.ndarray
    noise_cov_diag: np.ndarray
    clamp: tuple[float, float]
    x0_true: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        a = as_matrix(self.transition, "transition")
        n = a.shape[0]
        if a.shape[1] != n:
            raise ConfigurationError(f"transition must be square, got {a.shape}")
        u = as_vector(self.noise_mean, "noise_mean", length=n)
        q = as_vector(self.noise_cov_diag, "noise_cov_diag", length=n)
        if np.any(q < 0):
            raise ConfigurationError("noise_cov_diag entries must be >= 0")
        lo, hi = float(self.clamp[0]), float(self.clamp[1])
        if not lo < hi:
            raise ConfigurationError(f"clamp lower bound must be below upper, got [{lo}, {hi}]")
        x0 = self.x0_true
        x0 = np.full(n, 2.5) if x0 is None else as_vector(x0, "x0_true", length=n)
        for name, arr in (("transition", a), ("noise_mean", u),
                          ("noise_cov_diag", q), ("x0_true", x0)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "clamp", (lo, hi))

    @property
    def n(self) -> int:
        return self.transition.shape[0]


def canal_plant() -> PlantModel:
    """The five-location irrigation-canal instantiation.

    Water levels live on a 0..5 scale; inflow enters at location 1 and
    propagates downstream through the lower-triangular transition matrix.
    """
    a = np.array([
        [0.4, 0.0, 0.0, 0.0, 0.0],
        [0.6, 0.3, 0.0, 0.0, 0.0],
        [0.0, 0.7, 0.5, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.4, 0.0],
        [0.0, 0.0, 0.0, 0.6, 0.5],
    ])
    return PlantModel(
        transition=a,
        noise_mean=np.array([1.0, 0.0, 0.0, 0.0, 0.0]),
        noise_cov_diag=np.array([1.0, 0.1, 0.1, 0.1, 0.1]),
        clamp=(0.0, 5.0),
        x0_true=np.full(5, 2.5),
    )


def step_plant(model: PlantModel, x_prev: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Advance the plant one step: proj(A x + w) with a fresh noise draw."""
    x_prev = as_vector(x_prev, "x_prev", length=model.n)
    noise = model.noise_mean + np.sqrt(model.noise_cov_diag) * rng.standard_normal(model.n)
    return np.clip(model.transition @ x_prev + noise, model.clamp[0], model.clamp[1])


def propagate_particles(model: PlantModel, particles: ParticleSet,
                        rng: np.random.Generator) -> ParticleSet:
    """Advance every particle with an independent noise draw; weights unchanged."""
    if particles.state_dim != model.n:
        raise ConfigurationError(
            f"particle dimension {particles.state_dim} does not match plant dimension {model.n}")
    n_p = particles.n_particles
    noise = model.noise_mean + np.sqrt(model.noise_cov_diag) * rng.standard_normal((n_p, model.n))
    states = particles.states @ model.transition.T + noise
    np.clip(states, model.clamp[0], model.clamp[1], out=states)
    return ParticleSet(states=states, weights=particles.weights)
