"""A small fully-connected network with hand-written forward and backward passes.

Two heads are supported: a softmax over discrete labels and a scaled
sigmoid producing a bounded scalar. Gradients are exact reverse-mode, so
they can be checked against finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

HEAD_SOFTMAX = "softmax"
HEAD_SIGMOID_SCALE = "sigmoid_scale"


@dataclass
class MlpParams:
    weights: list = field(repr=False)
    biases: list = field(repr=False)
    head: str = HEAD_SOFTMAX
    output_scale: float = 1.0

    def __post_init__(self):
        if self.head not in (HEAD_SOFTMAX, HEAD_SIGMOID_SCALE):
            raise ConfigurationError(f"unknown head {self.head!r}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ConfigurationError("weights and biases must be parallel, nonempty lists")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ConfigurationError(f"layer {i} shapes inconsistent: {w.shape}, {b.shape}")
            if i > 0 and w.shape[0] != self.weights[i - 1].shape[1]:
                raise ConfigurationError(f"layer {i} input does not chain from layer {i - 1}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ConfigurationError(f"layer {i} has non-finite parameters")
        if self.head == HEAD_SIGMOID_SCALE and self.weights[-1].shape[1] != 1:
            raise ConfigurationError("sigmoid_scale head requires a single output unit")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def output_size(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "MlpParams":
        return MlpParams(weights=[w.copy() for w in self.weights],
                         biases=[b.copy() for b in self.biases],
                         head=self.head, output_scale=self.output_scale)


def init_mlp(layer_sizes, head: str = HEAD_SOFTMAX, seed: int | None = 0,
             output_scale: float = 1.0, rng: np.random.Generator | None = None) -> MlpParams:
    """Glorot-uniform weights, zero biases."""
    if len(layer_sizes) < 2:
        raise ConfigurationError("need at least input and output sizes")
    rng = np.random.default_rng(seed) if rng is None else rng
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=weights, biases=biases, head=head, output_scale=output_scale)


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_hidden(params: MlpParams, X: np.ndarray):
    activations = [X]
    pre = []
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        z = activations[-1] @ w + b
        pre.append(z)
        activations.append(_relu(z))
    logits = activations[-1] @ params.weights[-1] + params.biases[-1]
    return activations, pre, logits


def forward(params: MlpParams, X: np.ndarray) -> np.ndarray:
    """Batch forward pass: softmax probabilities or scaled-sigmoid scalars."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != params.layer_sizes[0]:
        raise ConfigurationError(
            f"input size {X.shape[1]} does not match network input {params.layer_sizes[0]}")
    _, _, logits = _forward_hidden(params, X)
    if params.head == HEAD_SOFTMAX:
        return _softmax(logits)
    return params.output_scale * _sigmoid(logits)[:, 0]


def classify(params: MlpParams, embedding: np.ndarray) -> np.ndarray:
    """Label distribution for a single embedding."""
    if params.head != HEAD_SOFTMAX:
        raise ConfigurationError("classify requires a softmax head")
    return forward(params, embedding[None, :])[0]


def regress(params: MlpParams, embedding: np.ndarray) -> float:
    """Bounded scalar prediction for a single embedding."""
    if params.head != HEAD_SIGMOID_SCALE:
        raise ConfigurationError("regress requires a sigmoid_scale head")
    return float(forward(params, embedding[None, :])[0])


def loss_and_gradients(params: MlpParams, X: np.ndarray, targets):
    """Mean loss over the batch and exact gradients for every parameter.

    Softmax head: cross-entropy against integer class indices (0-based).
    Sigmoid-scale head: squared error against real targets.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    batch = X.shape[0]
    activations, pre, logits = _forward_hidden(params, X)

    if params.head == HEAD_SOFTMAX:
        targets = np.asarray(targets, dtype=np.intp).reshape(batch)
        shifted = logits - logits.max(axis=1, keepdims=True)
        logsumexp = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
        loss = float(np.mean(logsumexp - logits[np.arange(batch), targets]))
        delta = _softmax(logits)
        delta[np.arange(batch), targets] -= 1.0
        delta /= batch
    else:
        targets = np.asarray(targets, dtype=np.float64).reshape(batch)
        s = _sigmoid(logits)[:, 0]
        out = params.output_scale * s
        loss = float(np.mean((out - targets) ** 2))
        dout = 2.0 * (out - targets) / batch
        delta = (dout * params.output_scale * s * (1.0 - s))[:, None]

    grads_w = [None] * len(params.weights)
    grads_b = [None] * len(params.biases)
    for layer in range(len(params.weights) - 1, -1, -1):
        grads_w[layer] = activations[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ params.weights[layer].T) * (pre[layer - 1] > 0)
    return loss, grads_w, grads_b


class AdamOptimizer:
    """Adam with bias correction, updating an MlpParams in place."""

    def __init__(self, params: MlpParams, learning_rate: float,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        # learning_rate 0 is allowed as a diagnostic no-op
        if learning_rate < 0:
            raise ConfigurationError("learning_rate must be >= 0")
        self.params = params
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self._m = [np.zeros_like(w) for w in params.weights] + \
                  [np.zeros_like(b) for b in params.biases]
        self._v = [np.zeros_like(w) for w in params.weights] + \
                  [np.zeros_like(b) for b in params.biases]

    def step(self, grads_w, grads_b) -> None:
        self.step_count += 1
        t = self.step_count
        scale = self.learning_rate * np.sqrt(1.0 - self.beta2**t) / (1.0 - self.beta1**t)
        tensors = list(self.params.weights) + list(self.params.biases)
        grads = list(grads_w) + list(grads_b)
        for p, g, m, v in zip(tensors, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            p -= scale * m / (np.sqrt(v) + self.epsilon)
