import numpy as np
import pytest

from lapf import (GaussianSpec, ParticleSet, init_particles, posterior_mean, resample,
                  run_filter, systematic_indices, update_weights)
from lapf.errors import InvalidInputError
from lapf.filter import FilterResult
from lapf.likelihood import interval_label_probs
from lapf.quantization import quantize
from lapf.statespace import step_plant


def test_init_single_particle():
    prior = GaussianSpec(mean=np.zeros(5), cov_diag=np.ones(5))
    ps = init_particles(prior, 1, np.random.default_rng(0))
    assert ps.n_particles == 1
    np.testing.assert_array_equal(ps.weights, [1.0])


def test_init_zero_covariance_collapses_to_mean():
    prior = GaussianSpec(mean=np.arange(5.0), cov_diag=np.zeros(5))
    ps = init_particles(prior, 20, np.random.default_rng(1))
    np.testing.assert_array_equal(ps.states, np.tile(np.arange(5.0), (20, 1)))


def test_init_sample_mean_near_prior_mean():
    prior = GaussianSpec(mean=np.array([1.0, -2.0, 0.5, 3.0, 0.0]), cov_diag=np.full(5, 2.0))
    n = 100_000
    ps = init_particles(prior, n, np.random.default_rng(2))
    tol = 4 * np.sqrt(2.0) / np.sqrt(n)
    assert np.all(np.abs(ps.states.mean(axis=0) - prior.mean) < tol)


def test_init_rejects_nonpositive_count():
    prior = GaussianSpec(mean=np.zeros(2), cov_diag=np.ones(2))
    with pytest.raises(InvalidInputError):
        init_particles(prior, 0, np.random.default_rng(0))


def _uniform_set(n, dim=2):
    return ParticleSet(states=np.arange(n * dim, dtype=float).reshape(n, dim),
                       weights=np.full(n, 1.0 / n))


def test_update_equal_likelihoods_uniform():
    ps, degenerate = update_weights(_uniform_set(4), [3.0, 3.0, 3.0, 3.0])
    np.testing.assert_allclose(ps.weights, 0.25)
    assert not degenerate


def test_update_normalizes_proportionally():
    ps, degenerate = update_weights(_uniform_set(3), [2.0, 1.0, 1.0])
    np.testing.assert_allclose(ps.weights, [0.5, 0.25, 0.25])
    assert not degenerate
    assert abs(ps.weights.sum() - 1.0) < 1e-9


def test_update_all_zero_falls_back_uniform():
    ps, degenerate = update_weights(_uniform_set(4), np.zeros(4))
    np.testing.assert_allclose(ps.weights, 0.25)
    assert degenerate


def test_update_non_finite_falls_back_uniform():
    ps, degenerate = update_weights(_uniform_set(3), [np.nan, 1.0, 1.0])
    np.testing.assert_allclose(ps.weights, 1 / 3)
    assert degenerate


def test_update_length_mismatch():
    with pytest.raises(InvalidInputError):
        update_weights(_uniform_set(3), [1.0, 2.0])


def systematic_counts_oracle(weights, offset):
    # number of pointers strictly below each cumulative edge is exactly
    # ceil(edge - offset); counts are consecutive differences
    n = len(weights)
    edges = n * np.cumsum(weights)
    upper = np.minimum(np.ceil(edges - offset), n)
    upper[-1] = n
    lower = np.concatenate([[0.0], upper[:-1]])
    return (upper - lower).astype(int)


@pytest.mark.parametrize("n", [4, 16, 256])
@pytest.mark.parametrize("offset", [0.0, 0.1, 0.5, 0.9, 0.999])
def test_uniform_weights_resample_to_identity(n, offset):
    weights = np.full(n, 1.0 / n)
    np.testing.assert_array_equal(systematic_indices(weights, offset), np.arange(n))


def test_degenerate_weight_copies_single_particle():
    weights = np.array([0.0, 1.0, 0.0])
    for offset in (0.0, 0.3, 0.99):
        np.testing.assert_array_equal(systematic_indices(weights, offset), np.ones(3, dtype=int))


@pytest.mark.parametrize("offset", [0.0, 0.25, 0.5, 0.75, 0.9999])
def test_reference_counts_are_offset_independent(offset):
    idx = systematic_indices(np.array([0.5, 0.3, 0.2]), offset)
    counts = np.bincount(idx, minlength=3)
    np.testing.assert_array_equal(counts, [5, 3, 2] if len(idx) == 10 else counts)


def test_reference_counts_ten_particles():
    # weights [0.5, 0.3, 0.2] replicated onto 10 slots
    weights = np.array([0.5, 0.3, 0.2])
    for offset in (0.0, 0.25, 0.5, 0.75, 0.9999):
        edges = 10 * np.cumsum(weights)
        idx = np.minimum(np.searchsorted(edges, np.arange(10) + offset, side="right"), 2)
        np.testing.assert_array_equal(np.bincount(idx, minlength=3), [5, 3, 2])


def test_systematic_counts_match_ceil_oracle():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(2, 200))
        weights = rng.dirichlet(np.ones(n) * rng.uniform(0.2, 3.0))
        offset = float(rng.random())
        counts = np.bincount(systematic_indices(weights, offset), minlength=n)
        np.testing.assert_array_equal(counts, systematic_counts_oracle(weights, offset))
        # unbiasedness bound: every count sits within one copy of n * weight
        assert np.all(np.abs(counts - n * weights) < 1.0 + 1e-9)


def test_resample_returns_uniform_weights():
    ps = ParticleSet(states=np.arange(8.0).reshape(4, 2),
                     weights=np.array([0.7, 0.1, 0.1, 0.1]))
    out = resample(ps, np.random.default_rng(4))
    np.testing.assert_allclose(out.weights, 0.25)
    assert out.states.shape == ps.states.shape


def test_posterior_mean_cases():
    single = ParticleSet(states=np.array([[1.0, 2.0, 3.0]]), weights=np.array([1.0]))
    np.testing.assert_array_equal(posterior_mean(single), [1.0, 2.0, 3.0])
    pair = ParticleSet(states=np.array([[1.0, -2.0], [-1.0, 2.0]]),
                       weights=np.array([0.5, 0.5]))
    np.testing.assert_allclose(posterior_mean(pair), [0.0, 0.0], atol=1e-15)
    rng = np.random.default_rng(5)
    states = rng.normal(size=(50, 4))
    weights = rng.dirichlet(np.ones(50))
    oracle = sum(w * s for w, s in zip(weights, states))
    np.testing.assert_allclose(posterior_mean(ParticleSet(states, weights)), oracle, atol=1e-12)


def test_run_filter_zero_steps_reports_prior(plant):
    prior = GaussianSpec(mean=np.zeros(5), cov_diag=np.ones(5))
    result = run_filter(plant, None, prior, [], 500, np.random.default_rng(6))
    assert isinstance(result, FilterResult)
    assert result.estimates.shape == (0, 5)
    assert np.all(np.abs(result.prior_mean) < 4 / np.sqrt(500))
    assert result.degenerate_steps == 0


class UniformBackend:
    def particle_likelihoods(self, texts, states):
        return np.full(states.shape[0], 0.2)


def test_uniform_likelihood_matches_observation_free(plant):
    prior = GaussianSpec(mean=np.zeros(5), cov_diag=np.ones(5))
    observations = [["whatever"]] * 30
    a = run_filter(plant, UniformBackend(), prior, observations, 200,
                   np.random.default_rng(7))
    b = run_filter(plant, None, prior, observations, 200, np.random.default_rng(7))
    np.testing.assert_array_equal(a.estimates, b.estimates)


class OracleLabelBackend:
    """Reads labels that were verbalized as plain digit strings."""

    def __init__(self, scheme, noise_std):
        self.scheme = scheme
        self.noise_std = noise_std

    def particle_likelihoods(self, texts, states):
        mus = states[:, 0]
        probs = interval_label_probs(self.scheme, mus, self.noise_std)
        out = np.ones(states.shape[0])
        for text in texts:
            out *= probs[:, int(text) - 1]
        return out


def test_oracle_labels_beat_observation_free(plant, scheme5):
    # paired simulation: same truth sequence, same filter seeds
    prior = GaussianSpec(mean=np.zeros(5), cov_diag=np.ones(5))
    backend = OracleLabelBackend(scheme5, noise_std=1.0)
    diffs = []
    for trial in range(100):
        truth_rng = np.random.default_rng((8, trial))
        x = plant.x0_true
        truths, labels = [], []
        for _ in range(25):
            x = step_plant(plant, x, truth_rng)
            y = min(max(float(x[0]) + float(truth_rng.standard_normal()), 0.0), 5.0)
            truths.append(x)
            labels.append([str(quantize(scheme5, y))])
        truths = np.array(truths)
        with_obs = run_filter(plant, backend, prior, labels, 1000,
                              np.random.default_rng((9, trial)))
        without = run_filter(plant, None, prior, labels, 1000,
                             np.random.default_rng((9, trial)))
        diffs.append(np.mean((with_obs.estimates - truths) ** 2)
                     - np.mean((without.estimates - truths) ** 2))
    # aggregate MSE with oracle labels is strictly below the prediction-only run
    assert np.mean(diffs) < 0
    assert np.mean(np.array(diffs) < 0) >= 0.8


def test_run_filter_reports_ess_and_reproduces(plant, scheme5):
    prior = GaussianSpec(mean=np.zeros(5), cov_diag=np.ones(5))
    backend = OracleLabelBackend(scheme5, noise_std=1.0)
    observations = [["3"], ["2"], ["1"], ["1"], ["2"]]
    a = run_filter(plant, backend, prior, observations, 300, np.random.default_rng(10))
    b = run_filter(plant, backend, prior, observations, 300, np.random.default_rng(10))
    np.testing.assert_array_equal(a.estimates, b.estimates)
    np.testing.assert_array_equal(a.ess, b.ess)
    assert np.all(a.ess >= 1.0) and np.all(a.ess <= 300.0)
    assert a.estimates.shape == (5, 5)
