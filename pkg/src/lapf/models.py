"""Trainable text models: the quantized-label classifier and the level regressor."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .embedding import HashingEmbedder, embedder_from_config
from .errors import ConfigurationError, InvalidInputError, TrainingDivergedError
from .network import (HEAD_SIGMOID_SCALE, HEAD_SOFTMAX, AdamOptimizer, MlpParams,
                      forward, init_mlp, loss_and_gradients)
from .validation import check_texts


class _TextMlpEstimator(BaseEstimator):
    """Shared embed-then-MLP training machinery (minibatch Adam)."""

    _head = HEAD_SOFTMAX

    def __init__(self, embedder=None, hidden_sizes=(128, 64), learning_rate=1e-5,
                 batch_size=16, epochs=100, beta1=0.9, beta2=0.999, epsilon=1e-8,
                 seed=0, keep_best=True):
        self.embedder = embedder
        self.hidden_sizes = hidden_sizes
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.seed = seed
        self.keep_best = keep_best

    # -- subclass hooks ----------------------------------------------------
    def _output_size(self) -> int:
        raise NotImplementedError

    def _output_scale(self) -> float:
        return 1.0

    def _prepare_targets(self, y) -> np.ndarray:
        raise NotImplementedError

    def _val_metrics(self, probs_or_values, y) -> dict:
        raise NotImplementedError

    def _selection_metric(self) -> str:
        raise NotImplementedError

    # -- shared machinery ---------------------------------------------------
    def _get_embedder(self):
        return self.embedder if self.embedder is not None else HashingEmbedder()

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")

    def fit(self, texts, y, eval_set=None):
        """Train with minibatch Adam; optionally track a validation set.

        With ``keep_best`` and an ``eval_set``, the parameters from the best
        validation epoch are the ones used afterwards; the last epoch's are
        kept in ``last_params_``.
        """
        if self.learning_rate < 0:
            raise ConfigurationError("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        texts = check_texts(texts)
        if not texts:
            raise InvalidInputError("training set is empty")
        embedder = self._get_embedder()
        X = embedder.transform(texts)
        targets = self._prepare_targets(y)
        if targets.shape[0] != X.shape[0]:
            raise InvalidInputError("texts and targets have different lengths")
        X_val = t_val = None
        if eval_set is not None:
            val_texts, val_y = eval_set
            X_val = embedder.transform(check_texts(val_texts))
            t_val = self._prepare_targets(val_y)

        rng = np.random.default_rng(self.seed)
        params = init_mlp([X.shape[1], *self.hidden_sizes, self._output_size()],
                          head=self._head, rng=rng, output_scale=self._output_scale())
        optimizer = AdamOptimizer(params, self.learning_rate, self.beta1, self.beta2,
                                  self.epsilon)
        n = X.shape[0]
        metric_name = self._selection_metric()
        history: dict = {"train_loss": []}
        best = (np.inf, None, -1)
        for epoch in range(self.epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for batch_index, start in enumerate(range(0, n, self.batch_size)):
                idx = order[start:start + self.batch_size]
                # overflow surfaces as a non-finite loss and is raised below
                with np.errstate(over="ignore", invalid="ignore"):
                    loss, grads_w, grads_b = loss_and_gradients(params, X[idx], targets[idx])
                if not np.isfinite(loss):
                    raise TrainingDivergedError(epoch=epoch, batch=batch_index, loss=loss)
                optimizer.step(grads_w, grads_b)
                epoch_loss += loss * idx.shape[0]
            history["train_loss"].append(epoch_loss / n)
            if X_val is not None:
                metrics = self._val_metrics(forward(params, X_val), t_val)
                for key, value in metrics.items():
                    history.setdefault(key, []).append(value)
                if metrics[metric_name] < best[0]:
                    best = (metrics[metric_name], params.copy(), epoch)

        self.last_params_ = params
        if self.keep_best and best[1] is not None:
            self.params_ = best[1]
            history["selected_epoch"] = best[2]
        else:
            self.params_ = params
            history["selected_epoch"] = self.epochs - 1
        history["selection"] = ("best_" + metric_name if self.keep_best and best[1] is not None
                                else "last_epoch")
        self.history_ = history
        self.embedder_ = embedder
        return self

    # -- persistence ---------------------------------------------------------
    def _meta(self) -> dict:
        return {
            "model": self._model_kind,
            "layer_sizes": self.params_.layer_sizes,
            "head": self.params_.head,
            "output_scale": self.params_.output_scale,
            "embedder": self.embedder_.config(),
            "seed": self.seed,
            "hidden_sizes": list(self.hidden_sizes),
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "history": {k: v for k, v in self.history_.items()},
        }

    def save(self, path) -> None:
        self._check_fitted()
        arrays = {f"w{i}": w for i, w in enumerate(self.params_.weights)}
        arrays.update({f"b{i}": b for i, b in enumerate(self.params_.biases)})
        with open(Path(path), "wb") as fh:
            np.savez(fh, meta=json.dumps(self._meta()), **arrays)

    @classmethod
    def _load_common(cls, path):
        with np.load(Path(path), allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            n_layers = len(meta["layer_sizes"]) - 1
            weights = [data[f"w{i}"] for i in range(n_layers)]
            biases = [data[f"b{i}"] for i in range(n_layers)]
        params = MlpParams(weights=weights, biases=biases, head=meta["head"],
                           output_scale=meta["output_scale"])
        est = cls(embedder=embedder_from_config(meta["embedder"]),
                  hidden_sizes=tuple(meta["hidden_sizes"]),
                  learning_rate=meta["learning_rate"], batch_size=meta["batch_size"],
                  epochs=meta["epochs"], seed=meta["seed"])
        est.params_ = params
        est.last_params_ = params
        est.history_ = meta["history"]
        est.embedder_ = est._get_embedder()
        return est, meta


class QuantizedLabelClassifier(_TextMlpEstimator):
    """Predicts a distribution over quantization labels from an observation text.

    Labels are 1-based interval indices; ``predict_proba`` columns follow
    label order 1..n_labels.
    """

    _head = HEAD_SOFTMAX
    _model_kind = "classifier"

    def __init__(self, embedder=None, n_labels=None, hidden_sizes=(128, 64),
                 learning_rate=1e-5, batch_size=16, epochs=100, beta1=0.9,
                 beta2=0.999, epsilon=1e-8, seed=0, keep_best=True):
        super().__init__(embedder=embedder, hidden_sizes=hidden_sizes,
                         learning_rate=learning_rate, batch_size=batch_size,
                         epochs=epochs, beta1=beta1, beta2=beta2, epsilon=epsilon,
                         seed=seed, keep_best=keep_best)
        self.n_labels = n_labels

    def _output_size(self) -> int:
        return self.n_labels_

    def _prepare_targets(self, y) -> np.ndarray:
        labels = np.asarray(y, dtype=np.intp)
        if labels.ndim != 1:
            raise InvalidInputError("labels must be a 1-D sequence")
        if np.any(labels < 1) or np.any(labels > self.n_labels_):
            raise InvalidInputError(f"labels must lie in 1..{self.n_labels_}")
        return labels - 1

    def _val_metrics(self, probs, targets) -> dict:
        picked = probs[np.arange(probs.shape[0]), targets]
        return {
            "val_loss": float(np.mean(-np.log(np.maximum(picked, 1e-300)))),
            "val_accuracy": float(np.mean(probs.argmax(axis=1) == targets)),
        }

    def _selection_metric(self) -> str:
        return "val_loss"

    def fit(self, texts, y, eval_set=None):
        labels = np.asarray(y, dtype=np.intp)
        if labels.size == 0:
            raise InvalidInputError("training set is empty")
        self.n_labels_ = int(self.n_labels) if self.n_labels else int(labels.max())
        if self.n_labels_ < 2:
            raise ConfigurationError("need at least two labels")
        return super().fit(texts, y, eval_set=eval_set)

    @property
    def classes_(self) -> np.ndarray:
        self._check_fitted()
        return np.arange(1, self.n_labels_ + 1)

    def predict_proba(self, texts) -> np.ndarray:
        self._check_fitted()
        X = self.embedder_.transform(check_texts(texts))
        return forward(self.params_, X)

    def predict(self, texts) -> np.ndarray:
        return self.predict_proba(texts).argmax(axis=1) + 1

    def label_distribution(self, text: str) -> np.ndarray:
        """Distribution p(label | text) for a single observation."""
        return self.predict_proba([text])[0]

    def _meta(self) -> dict:
        meta = super()._meta()
        meta["n_labels"] = self.n_labels_
        return meta

    @classmethod
    def load(cls, path) -> "QuantizedLabelClassifier":
        est, meta = cls._load_common(path)
        if meta["model"] != cls._model_kind:
            raise ConfigurationError(f"{path} holds a {meta['model']}, not a classifier")
        est.n_labels = est.n_labels_ = meta["n_labels"]
        return est


class TextLevelRegressor(_TextMlpEstimator):
    """Predicts the perceived level directly from an observation text.

    The sigmoid head keeps predictions inside [0, output_scale].
    """

    _head = HEAD_SIGMOID_SCALE
    _model_kind = "regressor"

    def __init__(self, embedder=None, output_scale=5.0, hidden_sizes=(128, 64),
                 learning_rate=1e-5, batch_size=16, epochs=100, beta1=0.9,
                 beta2=0.999, epsilon=1e-8, seed=0, keep_best=True):
        super().__init__(embedder=embedder, hidden_sizes=hidden_sizes,
                         learning_rate=learning_rate, batch_size=batch_size,
                         epochs=epochs, beta1=beta1, beta2=beta2, epsilon=epsilon,
                         seed=seed, keep_best=keep_best)
        self.output_scale = output_scale

    def _output_size(self) -> int:
        return 1

    def _output_scale(self) -> float:
        return float(self.output_scale)

    def _prepare_targets(self, y) -> np.ndarray:
        values = np.asarray(y, dtype=np.float64)
        if values.ndim != 1:
            raise InvalidInputError("targets must be a 1-D sequence")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("targets contain non-finite values")
        return values

    def _val_metrics(self, values, targets) -> dict:
        return {"val_mse": float(np.mean((values - targets) ** 2))}

    def _selection_metric(self) -> str:
        return "val_mse"

    def fit(self, texts, y, eval_set=None):
        super().fit(texts, y, eval_set=eval_set)
        self.val_mse_ = (self.history_["val_mse"][self.history_["selected_epoch"]]
                         if "val_mse" in self.history_ else None)
        return self

    def predict(self, texts) -> np.ndarray:
        self._check_fitted()
        X = self.embedder_.transform(check_texts(texts))
        return forward(self.params_, X)

    def predict_one(self, text: str) -> float:
        return float(self.predict([text])[0])

    def _meta(self) -> dict:
        meta = super()._meta()
        meta["val_mse"] = self.val_mse_
        return meta

    @classmethod
    def load(cls, path) -> "TextLevelRegressor":
        est, meta = cls._load_common(path)
        if meta["model"] != cls._model_kind:
            raise ConfigurationError(f"{path} holds a {meta['model']}, not a regressor")
        est.output_scale = meta["output_scale"]
        est.val_mse_ = meta.get("val_mse")
        return est
