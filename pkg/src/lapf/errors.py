"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A model, scheme, or config object is internally inconsistent."""


class InvalidInputError(ValueError):
    """An argument violates an operation's precondition."""


class CorpusError(RuntimeError):
    """The corpus cannot support the requested operation."""


class CorpusParseError(CorpusError):
    """A corpus file row is malformed."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmbeddingServiceError(RuntimeError):
    """Transport-level failure talking to a remote embedder; retryable."""


class ProtocolError(RuntimeError):
    """The remote embedder violated the wire contract; not retryable."""


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, batch: int, loss: float):
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch
