"""Observation likelihoods for particle weighting.

The label-fusion route scores a particle by combining the classifier's
label distribution with the closed-form probability of each label given the
particle's state. The pseudo-observation route treats a regressed scalar as
a noisy direct measurement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr  # erf-based Gaussian CDF, |abs err| < 1e-12

from .errors import ConfigurationError, InvalidInputError
from .humansensor import CognitiveModel
from .quantization import QuantizationScheme
from .validation import as_vector


def interval_label_probs(scheme: QuantizationScheme, mu, sigma: float) -> np.ndarray:
    """Probability of each quantization label for a clamped Gaussian percept.

    The percept is proj(mu + noise) with noise ~ N(0, sigma^2) and the
    projection onto [lo, hi]; censored mass beyond the range folds into the
    first and last labels. ``mu`` may be a scalar or an array; the result
    appends a final axis of length m.
    """
    if sigma <= 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma}")
    mu = np.asarray(mu, dtype=np.float64)
    inner = scheme.boundaries[1:-1]  # interior boundaries b_1 .. b_{m-1}
    z = (inner - mu[..., None]) / sigma
    cdf = ndtr(z)
    ones = np.ones(mu.shape + (1,))
    zeros = np.zeros(mu.shape + (1,))
    upper = np.concatenate([cdf, ones], axis=-1)
    lower = np.concatenate([zeros, cdf], axis=-1)
    return upper - lower


def fuse_label_distributions(p_label_given_text, p_label_given_state) -> np.ndarray:
    """Sum over labels of the two distributions' product (unnormalized likelihood).

    ``p_label_given_state`` may carry leading particle axes; the label axis
    is the last one.
    """
    text_probs = np.asarray(p_label_given_text, dtype=np.float64)
    state_probs = np.asarray(p_label_given_state, dtype=np.float64)
    if text_probs.ndim != 1 or state_probs.shape[-1] != text_probs.shape[0]:
        raise InvalidInputError("label distributions must agree on label count")
    return state_probs @ text_probs


def multi_sensor_likelihood(likelihoods) -> np.ndarray:
    """Joint likelihood of independent sensors: the product of the factors.

    Accepts a list of scalars or of per-particle arrays.
    """
    arr = np.asarray(likelihoods, dtype=np.float64)
    if np.any(arr < 0):
        raise InvalidInputError("likelihood factors must be nonnegative")
    return np.prod(arr, axis=0)


def gaussian_pdf(x, mean, variance: float) -> np.ndarray:
    return np.exp(-0.5 * (np.asarray(x) - mean) ** 2 / variance) / math.sqrt(2 * math.pi * variance)


@dataclass(frozen=True)
class LapfLikelihoodModel:
    """Label-fusion observation model: scheme + cognitive model + classifier."""

    scheme: QuantizationScheme
    cognitive: CognitiveModel
    classifier: object

    def __post_init__(self):
        m = getattr(self.classifier, "n_labels_", None)
        if m is not None and m != self.scheme.m:
            raise ConfigurationError(
                f"classifier outputs {m} labels but the scheme has {self.scheme.m}")

    def _percept_means(self, states: np.ndarray) -> np.ndarray:
        return states @ self.cognitive.readout

    def label_prob_given_state(self, x) -> np.ndarray:
        """Closed-form label distribution for a single state."""
        x = as_vector(x, "x", length=self.cognitive.readout.shape[0])
        return interval_label_probs(self.scheme, float(self.cognitive.readout @ x),
                                    self.cognitive.noise_std)

    def label_probs_for_states(self, states: np.ndarray) -> np.ndarray:
        """(N, m) label probabilities for a batch of particle states."""
        return interval_label_probs(self.scheme, self._percept_means(states),
                                    self.cognitive.noise_std)

    def likelihood(self, p_label_given_text, x) -> float:
        return float(fuse_label_distributions(p_label_given_text,
                                              self.label_prob_given_state(x)))

    def particle_likelihoods(self, texts, states: np.ndarray) -> np.ndarray:
        """Per-particle likelihood of one step's texts (product over sensors)."""
        state_probs = self.label_probs_for_states(states)
        factors = [fuse_label_distributions(self.classifier.label_distribution(t), state_probs)
                   for t in texts]
        return multi_sensor_likelihood(factors)


@dataclass(frozen=True)
class EdapfLikelihoodModel:
    """Pseudo-observation model: regressed level against a widened Gaussian.

    ``extra_noise_var`` absorbs the regressor's own error on top of the
    cognitive noise; it is conventionally set to the regressor's validation
    MSE.
    """

    cognitive: CognitiveModel
    regressor: object
    extra_noise_var: float

    def __post_init__(self):
        if not self.extra_noise_var > 0:
            raise ConfigurationError("extra_noise_var must be positive")

    def likelihood(self, pseudo_observation: float, x) -> float:
        x = as_vector(x, "x", length=self.cognitive.readout.shape[0])
        return float(self._densities(pseudo_observation, x[None, :])[0])

    def _densities(self, pseudo_observation: float, states: np.ndarray) -> np.ndarray:
        lo, hi = self.cognitive.clamp
        means = np.clip(states @ self.cognitive.readout, lo, hi)
        variance = self.cognitive.noise_std**2 + self.extra_noise_var
        return gaussian_pdf(pseudo_observation, means, variance)

    def particle_likelihoods(self, texts, states: np.ndarray) -> np.ndarray:
        factors = [self._densities(self.regressor.predict_one(t), states) for t in texts]
        return multi_sensor_likelihood(factors)
