from dataclasses import dataclass


@dataclass(frozen=True)
class ServiceConfig:
    """Service settings.

    ``model`` is either ``hash:<dim>`` for the deterministic built-in
    backend or any sentence-transformers model identifier (the reference
    setup uses a 768-dimensional sentence encoder).
    """

    model: str = "hash:256"
    host: str = "127.0.0.1"
    port: int = 8901
    max_batch: int = 64

    def __post_init__(self):
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
