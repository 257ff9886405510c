"""Shared oracle constructions used by both the unit and acceptance tests."""
import numpy as np


def finite_toy(seed: int = 0):
    """A finite observation toy: 3 particle states, 3 labels, 4 texts.

    Returns (p_text_given_label (4, 3), p_label_given_state (3, 3),
    p_label_given_text (4, 3)) where the last table is the Bayes posterior
    under a uniform label prior, i.e. exactly the quantity a perfectly
    calibrated classifier would produce.
    """
    rng = np.random.default_rng(seed)
    p_text_given_label = rng.uniform(0.05, 1.0, size=(4, 3))
    p_text_given_label /= p_text_given_label.sum(axis=0, keepdims=True)
    p_label_given_state = rng.uniform(0.05, 1.0, size=(3, 3))
    p_label_given_state /= p_label_given_state.sum(axis=1, keepdims=True)
    p_text = p_text_given_label.mean(axis=1)  # uniform prior 1/3 per label
    p_label_given_text = (p_text_given_label / 3.0) / p_text[:, None]
    return p_text_given_label, p_label_given_state, p_label_given_text


def exact_single_sensor(p_text_given_label, p_label_given_state, text_index):
    """Brute-force marginalization sum_j p(s|q_j) p(q_j|x) per state."""
    n_states, m = p_label_given_state.shape
    out = np.zeros(n_states)
    for i in range(n_states):
        for j in range(m):
            out[i] += p_text_given_label[text_index, j] * p_label_given_state[i, j]
    return out


def exact_joint_three_sensors(p_text_given_label, p_label_given_state, text_indices):
    """Brute-force joint over all label triples under per-sensor independence."""
    n_states, m = p_label_given_state.shape
    out = np.zeros(n_states)
    for i in range(n_states):
        total = 0.0
        for j1 in range(m):
            for j2 in range(m):
                for j3 in range(m):
                    total += (p_text_given_label[text_indices[0], j1]
                              * p_text_given_label[text_indices[1], j2]
                              * p_text_given_label[text_indices[2], j3]
                              * p_label_given_state[i, j1]
                              * p_label_given_state[i, j2]
                              * p_label_given_state[i, j3])
        out[i] = total
    return out
