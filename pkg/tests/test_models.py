import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from lapf import HashingEmbedder, QuantizedLabelClassifier, TextLevelRegressor, init_mlp
from lapf.errors import InvalidInputError, TrainingDivergedError
from lapf.network import HEAD_SIGMOID_SCALE, HEAD_SOFTMAX

TEXTS = ["almost no water", "very low flow", "normal level today", "quite high water",
         "flooding danger now", "bone dry bed", "river is shallow", "usual height",
         "water came up", "over the banks"] * 6
LABELS = [1, 2, 3, 4, 5, 1, 2, 3, 4, 5] * 6
LEVELS = [0.2, 1.4, 2.5, 3.6, 4.8, 0.1, 1.3, 2.4, 3.7, 4.9] * 6


def test_reference_training_defaults():
    clf = QuantizedLabelClassifier()
    assert (clf.learning_rate, clf.batch_size, clf.epochs) == (1e-5, 16, 100)
    assert (clf.beta1, clf.beta2, clf.epsilon) == (0.9, 0.999, 1e-8)
    assert clf.hidden_sizes == (128, 64)
    reg = TextLevelRegressor()
    assert (reg.learning_rate, reg.batch_size, reg.epochs) == (1e-5, 16, 100)
    assert reg.output_scale == 5.0
    assert QuantizedLabelClassifier()._get_embedder().n_features == 256


def test_zero_learning_rate_leaves_params_at_init():
    model = QuantizedLabelClassifier(n_labels=5, learning_rate=0.0, epochs=1, seed=9)
    model.fit(TEXTS, LABELS)
    rng = np.random.default_rng(9)
    reference = init_mlp([256, 128, 64, 5], head=HEAD_SOFTMAX, rng=rng)
    for got, want in zip(model.params_.weights, reference.weights):
        np.testing.assert_array_equal(got, want)


def test_regressor_zero_learning_rate_noop():
    model = TextLevelRegressor(learning_rate=0.0, epochs=1, seed=4)
    model.fit(TEXTS, LEVELS)
    rng = np.random.default_rng(4)
    reference = init_mlp([256, 128, 64, 1], head=HEAD_SIGMOID_SCALE, output_scale=5.0, rng=rng)
    for got, want in zip(model.params_.biases, reference.biases):
        np.testing.assert_array_equal(got, want)


def test_training_descends_and_beats_chance(corpus_split, scheme5, quick_classifier):
    history = quick_classifier.history_
    assert history["train_loss"][-1] < history["train_loss"][0]
    assert history["val_accuracy"][history["selected_epoch"]] > 1 / 5


def test_training_is_deterministic():
    def run():
        model = QuantizedLabelClassifier(n_labels=5, learning_rate=1e-4, epochs=5, seed=2)
        model.fit(TEXTS, LABELS, eval_set=(TEXTS[:10], LABELS[:10]))
        return model

    a, b = run(), run()
    assert a.history_["train_loss"][-1] == b.history_["train_loss"][-1]
    for wa, wb in zip(a.params_.weights, b.params_.weights):
        np.testing.assert_array_equal(wa, wb)


def test_divergence_reports_epoch_and_batch():
    # a step this size overflows the next forward pass to non-finite loss
    model = QuantizedLabelClassifier(n_labels=5, learning_rate=1e300, epochs=2, seed=0)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(TrainingDivergedError) as err:
            model.fit(TEXTS, LABELS)
    assert err.value.epoch >= 0 and err.value.batch >= 0


def test_predict_proba_is_distribution():
    model = QuantizedLabelClassifier(n_labels=5, learning_rate=1e-4, epochs=3, seed=1)
    model.fit(TEXTS, LABELS)
    probs = model.predict_proba(["some unseen words entirely", ""])
    assert probs.shape == (2, 5)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(probs >= 0)
    np.testing.assert_array_equal(model.classes_, [1, 2, 3, 4, 5])
    assert set(model.predict(TEXTS)) <= {1, 2, 3, 4, 5}


def test_unfitted_models_refuse_to_predict():
    with pytest.raises(NotFittedError):
        QuantizedLabelClassifier(n_labels=5).predict_proba(["x"])
    with pytest.raises(NotFittedError):
        TextLevelRegressor().predict(["x"])


def test_label_validation():
    with pytest.raises(InvalidInputError):
        QuantizedLabelClassifier(n_labels=3).fit(TEXTS, LABELS)  # labels exceed 3
    with pytest.raises(InvalidInputError):
        QuantizedLabelClassifier(n_labels=5).fit([], [])


def test_regressor_stays_bounded_and_tracks_val_mse():
    model = TextLevelRegressor(learning_rate=1e-4, epochs=6, seed=3)
    model.fit(TEXTS, LEVELS, eval_set=(TEXTS[:10], LEVELS[:10]))
    assert model.val_mse_ is not None and np.isfinite(model.val_mse_)
    assert model.history_["val_mse"][model.history_["selected_epoch"]] == model.val_mse_
    preds = model.predict(["never seen text", "flooding danger now"])
    assert np.all(preds >= 0.0) and np.all(preds <= 5.0)


def test_best_epoch_selection_recorded():
    model = QuantizedLabelClassifier(n_labels=5, learning_rate=1e-4, epochs=6, seed=5)
    model.fit(TEXTS, LABELS, eval_set=(TEXTS[:20], LABELS[:20]))
    sel = model.history_["selected_epoch"]
    assert model.history_["selection"] == "best_val_loss"
    assert model.history_["val_loss"][sel] == min(model.history_["val_loss"])
    last = QuantizedLabelClassifier(n_labels=5, learning_rate=1e-4, epochs=6, seed=5,
                                    keep_best=False)
    last.fit(TEXTS, LABELS, eval_set=(TEXTS[:20], LABELS[:20]))
    assert last.history_["selection"] == "last_epoch"


def test_classifier_save_load_round_trip(tmp_path, quick_classifier):
    path = tmp_path / "clf.npz"
    quick_classifier.save(path)
    loaded = QuantizedLabelClassifier.load(path)
    queries = ["the river is about to spill over!", "hardly any water left"]
    np.testing.assert_array_equal(loaded.predict_proba(queries),
                                  quick_classifier.predict_proba(queries))
    assert loaded.n_labels_ == 5
    assert isinstance(loaded.embedder_, HashingEmbedder)
    with pytest.raises(Exception):
        TextLevelRegressor.load(path)  # wrong model kind


def test_regressor_save_load_round_trip(tmp_path):
    model = TextLevelRegressor(learning_rate=1e-4, epochs=4, seed=6)
    model.fit(TEXTS, LEVELS, eval_set=(TEXTS[:10], LEVELS[:10]))
    path = tmp_path / "reg.npz"
    model.save(path)
    loaded = TextLevelRegressor.load(path)
    np.testing.assert_array_equal(loaded.predict(TEXTS[:7]), model.predict(TEXTS[:7]))
    assert loaded.val_mse_ == model.val_mse_
    assert loaded.output_scale == 5.0


def test_embedding_insensitive_to_corpus_order(corpus_split):
    emb = HashingEmbedder()
    texts = [r.text for r in corpus_split.records[:40]]
    direct = emb.transform(texts)
    shuffled_order = np.random.default_rng(0).permutation(len(texts))
    shuffled = emb.transform([texts[i] for i in shuffled_order])
    np.testing.assert_array_equal(shuffled[np.argsort(shuffled_order)], direct)


def test_ood_entropy_exceeds_in_domain(quick_classifier, corpus_split, ood_bank):
    def mean_entropy(probs):
        return float(np.mean(-np.sum(probs * np.log(np.maximum(probs, 1e-300)), axis=1)))

    test_texts = [r.text for r in corpus_split.in_split("test")]
    in_domain = mean_entropy(quick_classifier.predict_proba(test_texts))
    ood = mean_entropy(quick_classifier.predict_proba(ood_bank))
    assert ood > in_domain
