"""Text embedders behind a common transform interface.

``HashingEmbedder`` is the built-in, dependency-free backend: signed hashed
character n-grams, deterministic across processes. ``RemoteEmbedder`` talks
to an embedding service over HTTP for higher-fidelity vectors.
"""
from __future__ import annotations

import numpy as np
import requests
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import EmbeddingServiceError, ProtocolError
from .validation import check_texts

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def char_ngrams(text: str, sizes) -> list[str]:
    grams = []
    for n in sizes:
        grams.extend(text[i:i + n] for i in range(len(text) - n + 1))
    return grams


class HashingEmbedder(BaseEstimator, TransformerMixin):
    """Stateless text-to-vector transform via the signed hashing trick.

    Character n-grams are FNV-1a hashed; the low bits pick a bucket, one
    high bit picks the sign. Counts accumulate and the vector is
    L2-normalized (texts with no n-grams map to the zero vector).
    """

    kind = "hashing"

    def __init__(self, n_features: int = 256, ngram_sizes: tuple[int, ...] = (2, 3)):
        self.n_features = n_features
        self.ngram_sizes = ngram_sizes

    @property
    def dim(self) -> int:
        return self.n_features

    def fit(self, X=None, y=None):
        return self

    def transform(self, texts) -> np.ndarray:
        texts = check_texts(texts)
        out = np.zeros((len(texts), self.n_features))
        for row, text in enumerate(texts):
            for gram in char_ngrams(text, self.ngram_sizes):
                h = fnv1a64(gram.encode("utf-8"))
                sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
                out[row, h % self.n_features] += sign
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        np.divide(out, norms, out=out, where=norms > 0)
        return out

    def config(self) -> dict:
        return {"kind": self.kind, "n_features": self.n_features,
                "ngram_sizes": list(self.ngram_sizes)}


class RemoteEmbedder(BaseEstimator, TransformerMixin):
    """Client for the embedding-service wire protocol.

    POSTs ``{"texts": [...]}`` to ``<endpoint>/embed`` in batches and
    expects ``{"dim": d, "embeddings": [[...], ...]}`` rows in request
    order. Rows are L2-normalized client side.
    """

    kind = "remote"

    def __init__(self, endpoint: str, timeout: float = 10.0, batch_size: int = 32,
                 expected_dim: int | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.batch_size = batch_size
        self.expected_dim = expected_dim

    @property
    def dim(self) -> int | None:
        return self.expected_dim

    def fit(self, X=None, y=None):
        return self

    def _post_batch(self, batch: list[str]) -> np.ndarray:
        url = self.endpoint.rstrip("/") + "/embed"
        try:
            resp = requests.post(url, json={"texts": batch}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise EmbeddingServiceError(f"embedding request failed: {exc}") from exc
        if resp.status_code == 503:
            raise EmbeddingServiceError("embedding service unavailable (503)")
        if resp.status_code != 200:
            raise ProtocolError(f"embedding service returned {resp.status_code}: {resp.text[:200]}")
        try:
            payload = resp.json()
            dim = int(payload["dim"])
            rows = np.asarray(payload["embeddings"], dtype=np.float64)
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed embedding response: {exc}") from exc
        if rows.ndim != 2 or rows.shape != (len(batch), dim):
            raise ProtocolError(f"expected {(len(batch), dim)} embeddings, got {rows.shape}")
        if self.expected_dim is not None and dim != self.expected_dim:
            raise ProtocolError(f"service dim {dim} != expected {self.expected_dim}")
        if not np.all(np.isfinite(rows)):
            raise ProtocolError("embedding response contains non-finite values")
        return rows

    def transform(self, texts) -> np.ndarray:
        texts = check_texts(texts)
        if not texts:
            return np.zeros((0, self.expected_dim or 0))
        chunks = [self._post_batch(texts[i:i + self.batch_size])
                  for i in range(0, len(texts), self.batch_size)]
        out = np.vstack(chunks)
        if self.expected_dim is None:
            self.expected_dim = out.shape[1]
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        np.divide(out, norms, out=out, where=norms > 0)
        return out

    def config(self) -> dict:
        return {"kind": self.kind, "endpoint": self.endpoint, "timeout": self.timeout,
                "batch_size": self.batch_size, "expected_dim": self.expected_dim}


def embedder_from_config(config: dict):
    kind = config.get("kind")
    if kind == "hashing":
        return HashingEmbedder(n_features=int(config["n_features"]),
                               ngram_sizes=tuple(config["ngram_sizes"]))
    if kind == "remote":
        return RemoteEmbedder(endpoint=config["endpoint"],
                              timeout=float(config.get("timeout", 10.0)),
                              batch_size=int(config.get("batch_size", 32)),
                              expected_dim=config.get("expected_dim"))
    raise ProtocolError(f"unknown embedder kind {kind!r}")
