"""Particle filtering with natural-language observations from human sensors."""

from .corpus import (Corpus, ObservationRecord, generate_corpus, generate_ood_bank,
                     label_of, load_corpus, save_corpus, split_corpus)
from .embedding import HashingEmbedder, RemoteEmbedder
from .experiment import ExperimentConfig, build_config, run_experiment, summarize
from .filter import (FilterResult, init_particles, posterior_mean, resample,
                     run_filter, systematic_indices, update_weights)
from .humansensor import CognitiveModel, HumanSensorSim, emit_text, observe, perceive
from .likelihood import (EdapfLikelihoodModel, LapfLikelihoodModel,
                         fuse_label_distributions, interval_label_probs,
                         multi_sensor_likelihood)
from .models import QuantizedLabelClassifier, TextLevelRegressor
from .network import AdamOptimizer, MlpParams, classify, init_mlp, loss_and_gradients, regress
from .particles import ParticleSet
from .quantization import QuantizationScheme, quantize
from .statespace import GaussianSpec, PlantModel, canal_plant, propagate_particles, step_plant

__all__ = [
    "AdamOptimizer", "CognitiveModel", "Corpus", "EdapfLikelihoodModel",
    "ExperimentConfig", "FilterResult", "GaussianSpec", "HashingEmbedder",
    "HumanSensorSim", "LapfLikelihoodModel", "MlpParams", "ObservationRecord",
    "ParticleSet", "PlantModel", "QuantizationScheme", "QuantizedLabelClassifier",
    "RemoteEmbedder", "TextLevelRegressor", "build_config", "canal_plant", "classify",
    "emit_text", "fuse_label_distributions", "generate_corpus", "generate_ood_bank",
    "init_mlp", "init_particles", "interval_label_probs", "label_of", "load_corpus",
    "loss_and_gradients", "multi_sensor_likelihood", "observe", "perceive",
    "posterior_mean", "propagate_particles", "quantize", "regress", "resample",
    "run_experiment", "run_filter", "save_corpus", "split_corpus", "step_plant",
    "summarize", "systematic_indices", "update_weights",
]

__version__ = "0.1.0"
