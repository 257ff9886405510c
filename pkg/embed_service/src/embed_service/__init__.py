"""Embedding microservice speaking the lapf remote-embedder wire protocol."""

from .app import create_app
from .backends import DeterministicBackend, SentenceTransformerBackend, load_backend
from .config import ServiceConfig

__all__ = ["ServiceConfig", "create_app", "load_backend",
           "DeterministicBackend", "SentenceTransformerBackend"]
