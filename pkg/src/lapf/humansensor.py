"""Ground-truth human sensing: perception, quantization, text emission.

This simulates the reporting agents; the estimator never sees anything from
here except the emitted texts.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, CorpusError, InvalidInputError
from .quantization import QuantizationScheme, quantize
from .validation import as_vector


@dataclass(frozen=True)
class CognitiveModel:
    """Scalar percept formation: proj(readout . x + noise) onto [lo, hi]."""

    readout: np.ndarray          # 1 x n gain applied to the state
    noise_std: float
    clamp: tuple[float, float]

    def __post_init__(self):
        readout = as_vector(self.readout, "readout").copy()
        readout.flags.writeable = False
        if self.noise_std < 0:
            raise ConfigurationError("noise_std must be >= 0")
        lo, hi = float(self.clamp[0]), float(self.clamp[1])
        if not lo < hi:
            raise ConfigurationError("clamp lower bound must be below upper")
        object.__setattr__(self, "readout", readout)
        object.__setattr__(self, "clamp", (lo, hi))


def perceive(model: CognitiveModel, x: np.ndarray, rng: np.random.Generator) -> float:
    """Draw the agent's internal value for state x."""
    x = as_vector(x, "x", length=model.readout.shape[0])
    raw = float(model.readout @ x) + model.noise_std * float(rng.standard_normal())
    return float(min(max(raw, model.clamp[0]), model.clamp[1]))


@dataclass(frozen=True)
class SensorReading:
    """One emitted observation plus the internals it came from.

    ``level`` and ``label`` are evaluation-only ground truth; estimators
    receive ``text`` alone.
    """

    text: str
    level: float
    label: int


def _uniform_choice(items, rng: np.random.Generator):
    # rng.random() consumes a fixed number of stream draws regardless of
    # len(items), keeping paired runs aligned when the branch taken differs.
    u = rng.random()
    return items[min(int(u * len(items)), len(items) - 1)]


@dataclass(frozen=True)
class HumanSensorSim:
    """Maps perceived values to observation texts via a gridded text bank.

    ``level_keys`` are the discrete values the bank is indexed by;
    ``texts_by_key`` holds at least one candidate text per key. When
    ``ood_threshold`` is set, values below it emit from ``ood_bank``
    instead.
    """

    cognitive: CognitiveModel
    scheme: QuantizationScheme
    level_keys: np.ndarray
    texts_by_key: dict = field(repr=False)
    ood_bank: tuple = ()
    ood_threshold: float | None = None

    def __post_init__(self):
        keys = as_vector(self.level_keys, "level_keys").copy()
        if keys.shape[0] == 0:
            raise CorpusError("sensor sim needs at least one level key")
        if np.any(np.diff(keys) <= 0):
            raise ConfigurationError("level_keys must be strictly ascending")
        for k in keys:
            bucket = self.texts_by_key.get(float(k))
            if not bucket:
                raise CorpusError(f"no texts available for level key {k}")
        if self.ood_threshold is not None and not self.ood_bank:
            raise ConfigurationError("ood_threshold set but ood_bank is empty")
        keys.flags.writeable = False
        object.__setattr__(self, "level_keys", keys)
        object.__setattr__(self, "ood_bank", tuple(self.ood_bank))


def nearest_level_key(sim: HumanSensorSim, y: float) -> float:
    """Closest bank key to y; ties break toward the lower key."""
    keys = sim.level_keys
    pos = int(np.searchsorted(keys, y))
    if pos == 0:
        return float(keys[0])
    if pos == keys.shape[0]:
        return float(keys[-1])
    below, above = float(keys[pos - 1]), float(keys[pos])
    return below if y - below <= above - y else above


def emit_text(sim: HumanSensorSim, y: float, rng: np.random.Generator) -> str:
    """Sample an observation text for the perceived value y."""
    if not sim.scheme.contains(y):
        raise InvalidInputError(f"value {y!r} outside [{sim.scheme.lo}, {sim.scheme.hi}]")
    if sim.ood_threshold is not None and y < sim.ood_threshold:
        return _uniform_choice(sim.ood_bank, rng)
    bucket = sim.texts_by_key[nearest_level_key(sim, y)]
    return _uniform_choice(bucket, rng)


def observe(sim: HumanSensorSim, x: np.ndarray, rng: np.random.Generator) -> SensorReading:
    """Full sensing cascade: perceive, quantize, verbalize."""
    y = perceive(sim.cognitive, x, rng)
    q = quantize(sim.scheme, y)
    return SensorReading(text=emit_text(sim, y, rng), level=y, label=q)
