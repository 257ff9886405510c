"""Embedding backends: a real sentence encoder and a deterministic stand-in."""
from __future__ import annotations

import hashlib

import numpy as np


class DeterministicBackend:
    """Dependency-free embeddings for tests and offline runs.

    Character trigrams are bucketed by a cryptographic digest, so the
    mapping is stable across processes and platforms. Vectors are returned
    unnormalized, like the real encoder; clients normalize.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self._dim = dim

    @property
    def dim(self) -> int:
        return self._dim

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self._dim))
        for row, text in enumerate(texts):
            data = text.encode("utf-8")
            for i in range(max(len(data) - 2, 0)):
                digest = hashlib.blake2b(data[i:i + 3], digest_size=8).digest()
                value = int.from_bytes(digest, "big")
                sign = 1.0 if value & 1 else -1.0
                out[row, (value >> 1) % self._dim] += sign
        return out


class SentenceTransformerBackend:
    """Wraps a pretrained sentence encoder loaded by model identifier."""

    def __init__(self, model_id: str):
        from sentence_transformers import SentenceTransformer  # heavy, lazy import
        self._model = SentenceTransformer(model_id)
        probe = self._model.encode(["probe"], normalize_embeddings=False)
        self._dim = int(np.asarray(probe).shape[1])

    @property
    def dim(self) -> int:
        return self._dim

    def encode(self, texts: list[str]) -> np.ndarray:
        return np.asarray(self._model.encode(texts, normalize_embeddings=False),
                          dtype=np.float64)


def load_backend(model: str):
    if model.startswith("hash:"):
        return DeterministicBackend(dim=int(model.split(":", 1)[1]))
    return SentenceTransformerBackend(model)
