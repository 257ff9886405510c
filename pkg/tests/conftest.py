"""Shared fixtures. The session-scoped ones are expensive (full training runs
and the 400-trial experiment battery) and are reused by the acceptance tests."""
import time

import numpy as np
import pytest

from lapf import (QuantizationScheme, QuantizedLabelClassifier, TextLevelRegressor,
                  canal_plant, generate_corpus, generate_ood_bank, split_corpus)
from lapf.corpus import label_of
from lapf.experiment import ExperimentConfig, run_experiment
from lapf.likelihood import EdapfLikelihoodModel, LapfLikelihoodModel

CORPUS_SEED = 7
SPLIT_SEED = 11
TRAIN_SEED = 3
RUN_SEED = 1234
ACCEPTANCE_TRIALS = 400


@pytest.fixture(scope="session")
def scheme5():
    return QuantizationScheme.equal(0.0, 5.0, 5)


@pytest.fixture(scope="session")
def plant():
    return canal_plant()


@pytest.fixture(scope="session")
def corpus_split():
    return split_corpus(generate_corpus(seed=CORPUS_SEED), seed=SPLIT_SEED)


@pytest.fixture(scope="session")
def ood_bank():
    return generate_ood_bank(seed=CORPUS_SEED)


def _train_sets(corpus, scheme):
    train = corpus.in_split("train")
    val = corpus.in_split("val")
    return ([r.text for r in train], [label_of(r, scheme) for r in train],
            [r.level_ratio * 5 for r in train],
            [r.text for r in val], [label_of(r, scheme) for r in val],
            [r.level_ratio * 5 for r in val])


@pytest.fixture(scope="session")
def trained_classifier(corpus_split, scheme5):
    xt, yt, _, xv, yv, _ = _train_sets(corpus_split, scheme5)
    model = QuantizedLabelClassifier(n_labels=5, learning_rate=1e-5, epochs=100,
                                     seed=TRAIN_SEED)
    return model.fit(xt, yt, eval_set=(xv, yv))


@pytest.fixture(scope="session")
def trained_regressor(corpus_split, scheme5):
    xt, _, lt, xv, _, lv = _train_sets(corpus_split, scheme5)
    model = TextLevelRegressor(learning_rate=1e-5, epochs=100, seed=TRAIN_SEED)
    return model.fit(xt, lt, eval_set=(xv, lv))


@pytest.fixture(scope="session")
def quick_classifier(corpus_split, scheme5):
    """A cheap model for tests that just need something fitted."""
    xt, yt, _, xv, yv, _ = _train_sets(corpus_split, scheme5)
    model = QuantizedLabelClassifier(n_labels=5, learning_rate=1e-3, epochs=12,
                                     seed=TRAIN_SEED)
    return model.fit(xt, yt, eval_set=(xv, yv))


@pytest.fixture(scope="session")
def acceptance_config():
    return ExperimentConfig(trials=ACCEPTANCE_TRIALS, seed=RUN_SEED)


@pytest.fixture(scope="session")
def experiment_runs(acceptance_config, corpus_split, ood_bank,
                    trained_classifier, trained_regressor):
    """The five runs behind the MSE comparisons, plus the baseline wall time."""
    cfg = acceptance_config
    lapf_model = LapfLikelihoodModel(scheme=cfg.scheme(), cognitive=cfg.cognitive(),
                                     classifier=trained_classifier)
    edapf_model = EdapfLikelihoodModel(cognitive=cfg.cognitive(), regressor=trained_regressor,
                                       extra_noise_var=trained_regressor.val_mse_)
    runs = {}
    start = time.time()
    runs[("baseline", False)] = run_experiment(cfg, "baseline", corpus=corpus_split)
    baseline_seconds = time.time() - start
    for mode, model in (("lapf", lapf_model), ("edapf", edapf_model)):
        for ood in (False, True):
            runs[(mode, ood)] = run_experiment(cfg, mode, ood=ood, corpus=corpus_split,
                                               observation_model=model, ood_bank=ood_bank)
    return {"runs": runs, "baseline_seconds": baseline_seconds}


def pooled_se(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size))
