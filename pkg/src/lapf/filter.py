"""Particle filter core: initialization, weighting, resampling, execution."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .particles import ParticleSet, uniform_weights
from .statespace import GaussianSpec, PlantModel, propagate_particles


def init_particles(prior: GaussianSpec, n_particles: int, rng: np.random.Generator) -> ParticleSet:
    """Independent draws from the prior with uniform weights."""
    if n_particles < 1:
        raise InvalidInputError(f"n_particles must be >= 1, got {n_particles}")
    return ParticleSet(states=prior.sample(rng, size=n_particles),
                       weights=uniform_weights(n_particles))


def update_weights(particles: ParticleSet, likelihoods) -> tuple[ParticleSet, bool]:
    """Set weights proportional to the likelihoods.

    If every likelihood is zero or any is non-finite, the update is
    uninformative: weights fall back to uniform and the degenerate flag is
    returned True for the caller's diagnostics.
    """
    lik = np.asarray(likelihoods, dtype=np.float64)
    if lik.shape != (particles.n_particles,):
        raise InvalidInputError(
            f"need one likelihood per particle, got {lik.shape} for {particles.n_particles}")
    total = float(lik.sum())
    if not np.isfinite(total) or total <= 0 or np.any(lik < 0) or not np.all(np.isfinite(lik)):
        return ParticleSet(particles.states, uniform_weights(particles.n_particles)), True
    return ParticleSet(particles.states, lik / total), False


def systematic_indices(weights: np.ndarray, offset: float) -> np.ndarray:
    """Ancestor indices for systematic resampling with a given offset in [0, 1)."""
    n = weights.shape[0]
    edges = n * np.cumsum(weights)
    idx = np.searchsorted(edges, np.arange(n) + offset, side="right")
    return np.minimum(idx, n - 1)


def resample(particles: ParticleSet, rng: np.random.Generator) -> ParticleSet:
    """Systematic resampling: one uniform offset, evenly spaced pointers."""
    idx = systematic_indices(particles.weights, rng.random())
    return ParticleSet(states=particles.states[idx],
                       weights=uniform_weights(particles.n_particles))


def posterior_mean(particles: ParticleSet) -> np.ndarray:
    """Weighted mean of the particle states."""
    return particles.weights @ particles.states


@dataclass
class FilterResult:
    """Per-step outputs of one filter run."""

    prior_mean: np.ndarray
    estimates: np.ndarray          # (T, n)
    ess: np.ndarray                # (T,), effective sample size after each update
    degenerate: np.ndarray         # (T,) bool, uninformative-update fallback taken

    @property
    def degenerate_steps(self) -> int:
        return int(self.degenerate.sum())


def run_filter(plant: PlantModel, observation_model, prior: GaussianSpec,
               observations, n_particles: int, rng: np.random.Generator) -> FilterResult:
    """Run the filter over a sequence of observation-text lists.

    ``observations`` holds one list of texts per step (multiple texts mean
    multiple reporting agents). ``observation_model`` must provide
    ``particle_likelihoods(texts, states)``; pass None for the
    observation-free, prediction-only run. Each step propagates, weights,
    estimates, and then resamples unconditionally, so weights re-enter every
    step uniform.
    """
    particles = init_particles(prior, n_particles, rng)
    prior_mu = posterior_mean(particles)
    steps = len(observations)
    estimates = np.zeros((steps, plant.n))
    ess = np.zeros(steps)
    degenerate = np.zeros(steps, dtype=bool)
    for k, texts in enumerate(observations):
        particles = propagate_particles(plant, particles, rng)
        if observation_model is not None and texts:
            likelihoods = observation_model.particle_likelihoods(texts, particles.states)
            particles, degenerate[k] = update_weights(particles, likelihoods)
        estimates[k] = posterior_mean(particles)
        ess[k] = particles.ess()
        particles = resample(particles, rng)
    return FilterResult(prior_mean=prior_mu, estimates=estimates, ess=ess,
                        degenerate=degenerate)
