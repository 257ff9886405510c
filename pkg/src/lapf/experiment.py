"""Experiment orchestration: config, trial execution, metrics, file outputs."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .corpus import Corpus, load_ood_bank, text_bank
from .embedding import HashingEmbedder, RemoteEmbedder
from .errors import ConfigurationError
from .filter import run_filter
from .humansensor import CognitiveModel, HumanSensorSim, observe
from .likelihood import EdapfLikelihoodModel, LapfLikelihoodModel
from .models import QuantizedLabelClassifier, TextLevelRegressor
from .quantization import QuantizationScheme
from .statespace import GaussianSpec, PlantModel, step_plant

MODES = ("baseline", "edapf", "lapf")


def _canal_transition() -> tuple:
    return ((0.4, 0.0, 0.0, 0.0, 0.0),
            (0.6, 0.3, 0.0, 0.0, 0.0),
            (0.0, 0.7, 0.5, 0.0, 0.0),
            (0.0, 0.0, 0.5, 0.4, 0.0),
            (0.0, 0.0, 0.0, 0.6, 0.5))


@dataclass
class ExperimentConfig:
    """Flat experiment settings; config-file keys mirror the field names."""

    # plant
    plant_transition: tuple = field(default_factory=_canal_transition)
    plant_noise_mean: tuple = (1.0, 0.0, 0.0, 0.0, 0.0)
    plant_noise_cov_diag: tuple = (1.0, 0.1, 0.1, 0.1, 0.1)
    plant_clamp_lo: float = 0.0
    plant_clamp_hi: float = 5.0
    plant_x0: tuple = (2.5, 2.5, 2.5, 2.5, 2.5)
    # filter prior (deliberately mismatched with the true x0)
    prior_mean: tuple = (0.0, 0.0, 0.0, 0.0, 0.0)
    prior_cov_diag: tuple = (1.0, 1.0, 1.0, 1.0, 1.0)
    # quantization and cognition
    scheme_lo: float = 0.0
    scheme_hi: float = 5.0
    scheme_m: int = 5
    cognitive_readout: tuple = (1.0, 0.0, 0.0, 0.0, 0.0)
    cognitive_noise_std: float = 1.0
    # run sizes
    steps: int = 100
    n_particles: int = 1000
    trials: int = 1000
    n_sensors: int = 1
    seed: int = 1234
    workers: int = 1
    # out-of-domain injection
    ood_threshold: float = 0.2
    # corpus generation / split
    corpus_seed: int = 7
    texts_per_level: int = 48
    boundary_blur: float = 0.03
    split_seed: int = 11
    train_fractions: tuple = (0.792, 0.086, 0.122)
    # training
    learning_rate: float = 1e-5
    batch_size: int = 16
    epochs: int = 100
    train_seed: int = 3
    embed_kind: str = "hashing"
    embed_features: int = 256
    embed_endpoint: str = ""
    edapf_noise_var: float | None = None
    # paths
    corpus_path: str = "data/corpus.csv"
    ood_bank_path: str = "data/ood_bank.txt"
    classifier_path: str = "models/classifier.npz"
    regressor_path: str = "models/regressor.npz"
    output_dir: str = "out"

    def __post_init__(self):
        for name in ("steps", "n_particles", "trials", "n_sensors"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1")

    def scheme(self) -> QuantizationScheme:
        return QuantizationScheme.equal(self.scheme_lo, self.scheme_hi, self.scheme_m)

    def plant(self) -> PlantModel:
        return PlantModel(transition=np.array(self.plant_transition),
                          noise_mean=np.array(self.plant_noise_mean),
                          noise_cov_diag=np.array(self.plant_noise_cov_diag),
                          clamp=(self.plant_clamp_lo, self.plant_clamp_hi),
                          x0_true=np.array(self.plant_x0))

    def prior(self) -> GaussianSpec:
        return GaussianSpec(mean=np.array(self.prior_mean),
                            cov_diag=np.array(self.prior_cov_diag))

    def cognitive(self) -> CognitiveModel:
        return CognitiveModel(readout=np.array(self.cognitive_readout),
                              noise_std=self.cognitive_noise_std,
                              clamp=(self.scheme_lo, self.scheme_hi))

    def embedder(self):
        if self.embed_kind == "hashing":
            return HashingEmbedder(n_features=self.embed_features)
        if self.embed_kind == "remote":
            if not self.embed_endpoint:
                raise ConfigurationError("embed_kind=remote requires embed_endpoint")
            return RemoteEmbedder(endpoint=self.embed_endpoint)
        raise ConfigurationError(f"unknown embed_kind {self.embed_kind!r}")


_INT_KEYS = {"scheme_m", "steps", "n_particles", "trials", "n_sensors", "seed", "workers",
             "corpus_seed", "texts_per_level", "split_seed", "batch_size", "epochs",
             "train_seed", "embed_features"}
_FLOAT_KEYS = {"plant_clamp_lo", "plant_clamp_hi", "scheme_lo", "scheme_hi",
               "cognitive_noise_std", "learning_rate", "boundary_blur"}
_OPT_FLOAT_KEYS = {"ood_threshold", "edapf_noise_var"}
_VEC_KEYS = {"plant_noise_mean", "plant_noise_cov_diag", "plant_x0", "prior_mean",
             "prior_cov_diag", "cognitive_readout", "train_fractions"}
_MAT_KEYS = {"plant_transition"}
_STR_KEYS = {"embed_kind", "embed_endpoint", "corpus_path", "ood_bank_path",
             "classifier_path", "regressor_path", "output_dir"}


def _parse_vector(text: str) -> tuple:
    parts = text.replace(",", " ").split()
    return tuple(float(p) for p in parts)


def parse_config_value(key: str, text: str):
    text = text.strip()
    if key in _INT_KEYS:
        return int(text)
    if key in _FLOAT_KEYS:
        return float(text)
    if key in _OPT_FLOAT_KEYS:
        return None if text.lower() in ("none", "") else float(text)
    if key in _VEC_KEYS:
        return _parse_vector(text)
    if key in _MAT_KEYS:
        return tuple(_parse_vector(row) for row in text.split(";"))
    if key in _STR_KEYS:
        return text
    raise ConfigurationError(f"unknown config key {key!r}")


def load_config_file(path) -> dict:
    """Parse a `key = value` document (UTF-8, # comments)."""
    overrides = {}
    for line_num, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{line_num}: expected 'key = value'")
        key, _, value = line.partition("=")
        overrides[key.strip()] = parse_config_value(key.strip(), value)
    return overrides


def build_config(config_file=None, **overrides) -> ExperimentConfig:
    """Defaults, then config-file keys, then explicit overrides."""
    values = {}
    if config_file is not None:
        values.update(load_config_file(config_file))
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**values)


# ---------------------------------------------------------------------------
# Truth simulation and trials

def build_sensor_sim(config: ExperimentConfig, corpus: Corpus, ood: bool,
                     ood_bank: list[str] | None = None) -> HumanSensorSim:
    """Assemble the ground-truth sensing simulator from the test split."""
    scheme = config.scheme()
    keys, bank = text_bank(corpus, scheme, split="test")
    threshold = config.ood_threshold if ood else None
    if ood and ood_bank is None:
        ood_bank = load_ood_bank(config.ood_bank_path)
    return HumanSensorSim(cognitive=config.cognitive(), scheme=scheme,
                          level_keys=keys, texts_by_key=bank,
                          ood_bank=tuple(ood_bank or ()), ood_threshold=threshold)


def simulate_truth(plant: PlantModel, sim: HumanSensorSim, steps: int, n_sensors: int,
                   rng: np.random.Generator):
    """Roll the plant forward and emit per-step observation texts."""
    x = plant.x0_true
    truths = np.zeros((steps, plant.n))
    texts = []
    for k in range(steps):
        x = step_plant(plant, x, rng)
        truths[k] = x
        texts.append([observe(sim, x, rng).text for _ in range(n_sensors)])
    return truths, texts


def build_observation_model(mode: str, config: ExperimentConfig):
    """Load the trained model backing a run mode; None for the baseline."""
    if mode == "baseline":
        return None
    if mode == "lapf":
        classifier = QuantizedLabelClassifier.load(config.classifier_path)
        return LapfLikelihoodModel(scheme=config.scheme(), cognitive=config.cognitive(),
                                   classifier=classifier)
    if mode == "edapf":
        regressor = TextLevelRegressor.load(config.regressor_path)
        noise_var = config.edapf_noise_var
        if noise_var is None:
            noise_var = regressor.val_mse_
        if noise_var is None:
            raise ConfigurationError(
                "edapf needs a pseudo-observation noise variance: train the regressor "
                "with a validation split or set edapf_noise_var")
        return EdapfLikelihoodModel(cognitive=config.cognitive(), regressor=regressor,
                                    extra_noise_var=float(noise_var))
    raise ConfigurationError(f"unknown mode {mode!r}; expected one of {MODES}")


def _run_one_trial(args):
    config, observation_model, sim, trial = args
    plant = config.plant()
    # stream 0 drives the plant and the sensors, stream 1 the filter, so every
    # mode sees identical truth and text realizations for a given trial
    truth_rng = np.random.default_rng([config.seed + trial, 0])
    filter_rng = np.random.default_rng([config.seed + trial, 1])
    truths, texts = simulate_truth(plant, sim, config.steps, config.n_sensors, truth_rng)
    result = run_filter(plant, observation_model, config.prior(), texts,
                        config.n_particles, filter_rng)
    return truths, result


@dataclass
class ExperimentResult:
    """All per-trial arrays for one (mode, ood) run."""

    mode: str
    ood: bool
    true_states: np.ndarray     # (trials, T, n)
    estimates: np.ndarray       # (trials, T, n)
    ess: np.ndarray             # (trials, T)
    degenerate: np.ndarray      # (trials, T) bool

    @property
    def trials(self) -> int:
        return self.true_states.shape[0]

    def squared_errors(self) -> np.ndarray:
        return (self.estimates - self.true_states) ** 2

    def per_trial_overall_mse(self) -> np.ndarray:
        """Mean over steps and locations, one value per trial."""
        return self.squared_errors().mean(axis=(1, 2))

    def per_trial_location_mse(self) -> np.ndarray:
        """(trials, n) mean over steps at each location."""
        return self.squared_errors().mean(axis=1)


def run_experiment(config: ExperimentConfig, mode: str, ood: bool = False,
                   corpus: Corpus | None = None, observation_model=None,
                   ood_bank: list[str] | None = None) -> ExperimentResult:
    """Run `config.trials` independent filter executions for one mode."""
    from .corpus import load_corpus  # local import keeps module load light
    if corpus is None:
        corpus = load_corpus(config.corpus_path)
    if observation_model is None and mode != "baseline":
        observation_model = build_observation_model(mode, config)
    sim = build_sensor_sim(config, corpus, ood=ood, ood_bank=ood_bank)
    jobs = [(config, observation_model, sim, t) for t in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_run_one_trial, jobs, chunksize=8))
    else:
        outcomes = [_run_one_trial(job) for job in jobs]
    true_states = np.stack([t for t, _ in outcomes])
    estimates = np.stack([r.estimates for _, r in outcomes])
    ess = np.stack([r.ess for _, r in outcomes])
    degenerate = np.stack([r.degenerate for _, r in outcomes])
    return ExperimentResult(mode=mode, ood=ood, true_states=true_states,
                            estimates=estimates, ess=ess, degenerate=degenerate)


# ---------------------------------------------------------------------------
# Metrics and file outputs

@dataclass
class MetricsReport:
    mode: str
    ood: bool
    trials: int
    overall_mean: float
    overall_std: float
    per_location_mean: list
    per_location_std: list
    degenerate_total: int

    def to_dict(self) -> dict:
        return {"mode": self.mode, "ood": self.ood, "trials": self.trials,
                "overall_mean": self.overall_mean, "overall_std": self.overall_std,
                "per_location_mean": self.per_location_mean,
                "per_location_std": self.per_location_std,
                "degenerate_total": self.degenerate_total}


def summarize(result: ExperimentResult) -> MetricsReport:
    overall = result.per_trial_overall_mse()
    per_loc = result.per_trial_location_mse()
    ddof = 1 if result.trials > 1 else 0
    return MetricsReport(
        mode=result.mode, ood=result.ood, trials=result.trials,
        overall_mean=float(overall.mean()), overall_std=float(overall.std(ddof=ddof)),
        per_location_mean=[float(v) for v in per_loc.mean(axis=0)],
        per_location_std=[float(v) for v in per_loc.std(axis=0, ddof=ddof)],
        degenerate_total=int(result.degenerate.sum()),
    )


def write_trajectories_csv(path, result: ExperimentResult) -> None:
    n = result.true_states.shape[2]
    header = (["trial", "step"] + [f"true_{i + 1}" for i in range(n)]
              + [f"est_{i + 1}" for i in range(n)] + ["ess", "degenerate"])
    lines = [",".join(header)]
    for t in range(result.trials):
        for k in range(result.true_states.shape[1]):
            row = [str(t), str(k + 1)]
            row += [repr(float(v)) for v in result.true_states[t, k]]
            row += [repr(float(v)) for v in result.estimates[t, k]]
            row.append(repr(float(result.ess[t, k])))
            row.append(str(int(result.degenerate[t, k])))
            lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_metrics_json(path, report: MetricsReport) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_metrics_json(path) -> MetricsReport:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return MetricsReport(mode=data["mode"], ood=data["ood"], trials=data["trials"],
                         overall_mean=data["overall_mean"], overall_std=data["overall_std"],
                         per_location_mean=data["per_location_mean"],
                         per_location_std=data["per_location_std"],
                         degenerate_total=data["degenerate_total"])


def write_comparison_csv(path, reports: list[MetricsReport]) -> None:
    """Merge per-method metrics into the location/method MSE table."""
    def mode_order(report):
        try:
            return (MODES.index(report.mode), report.mode)
        except ValueError:
            return (len(MODES), report.mode)

    lines = ["location,method,mse_mean,mse_std"]
    for report in sorted(reports, key=mode_order):
        for loc in range(len(report.per_location_mean)):
            lines.append(f"{loc + 1},{report.mode},{report.per_location_mean[loc]!r},"
                         f"{report.per_location_std[loc]!r}")
        lines.append(f"overall,{report.mode},{report.overall_mean!r},{report.overall_std!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
