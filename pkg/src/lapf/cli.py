"""Command-line entry points for corpus generation, training, and experiments."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .errors import (ConfigurationError, CorpusParseError, InvalidInputError,
                     TrainingDivergedError)
from .experiment import (MODES, ExperimentConfig, build_config, build_observation_model,
                         load_metrics_json, run_experiment, summarize,
                         write_comparison_csv, write_metrics_json, write_trajectories_csv)
from .filter import init_particles, posterior_mean, resample, update_weights
from .models import QuantizedLabelClassifier, TextLevelRegressor
from .statespace import propagate_particles

USAGE_EXIT = 2
FAILURE_EXIT = 1


def _add_config_arg(parser):
    parser.add_argument("--config", default=None, help="key = value config file")


def _build(args, **extra) -> ExperimentConfig:
    overrides = dict(extra)
    for key in ("seed", "trials", "steps", "n_particles", "workers", "corpus_path",
                "ood_bank_path", "classifier_path", "regressor_path", "output_dir",
                "learning_rate", "epochs", "batch_size", "train_seed", "corpus_seed",
                "split_seed", "texts_per_level", "embed_kind", "embed_features",
                "embed_endpoint", "n_sensors"):
        if hasattr(args, key) and getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    return build_config(config_file=args.config, **overrides)


def _require_file(path, what: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"{what} not found: {path}")
    return path


# ---------------------------------------------------------------------------
# Subcommands

def cmd_gen_corpus(args) -> int:
    config = _build(args)
    if args.fractions is not None:
        parts = tuple(float(p) for p in args.fractions.split(","))
        config.train_fractions = parts
    full = corpus_mod.generate_corpus(seed=config.corpus_seed,
                                      texts_per_level=config.texts_per_level,
                                      boundary_blur=config.boundary_blur)
    split = corpus_mod.split_corpus(full, fractions=tuple(config.train_fractions),
                                    seed=config.split_seed)
    out_path = Path(config.corpus_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    corpus_mod.save_corpus(split, out_path)
    bank = corpus_mod.generate_ood_bank(seed=config.corpus_seed)
    bank_path = Path(config.ood_bank_path)
    bank_path.parent.mkdir(parents=True, exist_ok=True)
    corpus_mod.save_ood_bank(bank, bank_path)
    sizes = split.split_sizes()
    print(f"corpus: {len(split.records)} records -> {out_path}")
    for name in ("train", "val", "test"):
        print(f"  {name}: {sizes[name]}")
    print(f"ood bank: {len(bank)} phrases -> {bank_path}")
    return 0


def _load_training_data(config: ExperimentConfig):
    path = _require_file(config.corpus_path, "corpus")
    corp = corpus_mod.load_corpus(path)
    scheme = config.scheme()
    train = corp.in_split("train")
    val = corp.in_split("val")
    if not train:
        raise ConfigurationError("corpus has no train split")
    return corp, scheme, train, val


def _write_loss_csv(path, history: dict, columns: list[str]) -> None:
    lines = [",".join(["epoch"] + columns)]
    for epoch in range(len(history["train_loss"])):
        row = [str(epoch)] + [repr(history[c][epoch]) for c in columns]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_train_classifier(args) -> int:
    config = _build(args)
    _, scheme, train, val = _load_training_data(config)
    texts = [r.text for r in train]
    labels = [corpus_mod.label_of(r, scheme) for r in train]
    eval_set = None
    if val:
        eval_set = ([r.text for r in val], [corpus_mod.label_of(r, scheme) for r in val])
    model = QuantizedLabelClassifier(
        embedder=config.embedder(), n_labels=scheme.m, learning_rate=config.learning_rate,
        batch_size=config.batch_size, epochs=config.epochs, seed=config.train_seed)
    model.fit(texts, labels, eval_set=eval_set)
    out = Path(config.classifier_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    model.save(out)
    columns = ["train_loss"] + (["val_loss", "val_accuracy"] if eval_set else [])
    _write_loss_csv(out.with_suffix(".loss.csv"), model.history_, columns)
    last = model.history_["train_loss"][-1]
    print(f"classifier saved -> {out}")
    print(f"final train loss: {last:.6f}")
    if eval_set:
        sel = model.history_["selected_epoch"]
        print(f"selected epoch: {sel} "
              f"(val loss {model.history_['val_loss'][sel]:.6f}, "
              f"val accuracy {model.history_['val_accuracy'][sel]:.4f})")
    return 0


def cmd_train_regressor(args) -> int:
    config = _build(args)
    _, scheme, train, val = _load_training_data(config)
    span = scheme.hi - scheme.lo
    texts = [r.text for r in train]
    targets = [r.level_ratio * span + scheme.lo for r in train]
    eval_set = None
    if val:
        eval_set = ([r.text for r in val],
                    [r.level_ratio * span + scheme.lo for r in val])
    model = TextLevelRegressor(
        embedder=config.embedder(), output_scale=scheme.hi, learning_rate=config.learning_rate,
        batch_size=config.batch_size, epochs=config.epochs, seed=config.train_seed)
    model.fit(texts, targets, eval_set=eval_set)
    out = Path(config.regressor_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    model.save(out)
    columns = ["train_loss"] + (["val_mse"] if eval_set else [])
    _write_loss_csv(out.with_suffix(".loss.csv"), model.history_, columns)
    print(f"regressor saved -> {out}")
    print(f"final train loss: {model.history_['train_loss'][-1]:.6f}")
    if model.val_mse_ is not None:
        print(f"validation MSE (pseudo-observation noise variance): {model.val_mse_:.6f}")
    return 0


def cmd_run(args) -> int:
    config = _build(args)
    mode = args.mode
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}")
    _require_file(config.corpus_path, "corpus")
    if mode == "lapf":
        _require_file(config.classifier_path, "trained classifier")
    if mode == "edapf":
        _require_file(config.regressor_path, "trained regressor")
    if args.ood:
        _require_file(config.ood_bank_path, "OOD bank")
    result = run_experiment(config, mode=mode, ood=args.ood)
    report = summarize(result)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = f"{mode}_ood" if args.ood else mode
    write_trajectories_csv(out_dir / f"trajectory_{suffix}.csv", result)
    write_metrics_json(out_dir / f"metrics_{suffix}.json", report)
    print(f"mode={mode} ood={args.ood} trials={report.trials}")
    print(f"overall MSE: {report.overall_mean:.4f} +/- {report.overall_std:.4f}")
    for loc, (mean, std) in enumerate(zip(report.per_location_mean,
                                          report.per_location_std), 1):
        print(f"  location {loc}: {mean:.4f} +/- {std:.4f}")
    print(f"degenerate updates: {report.degenerate_total}")
    print(f"outputs -> {out_dir}")
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.metrics:
        reports.append(load_metrics_json(_require_file(path, "metrics file")))
    write_comparison_csv(args.out, reports)
    print(f"comparison table ({len(reports)} methods) -> {args.out}")
    return 0


def cmd_interactive(args) -> int:
    config = _build(args)
    _require_file(config.classifier_path, "trained classifier")
    model = build_observation_model("lapf", config)
    plant = config.plant()
    rng = np.random.default_rng(config.seed)
    particles = init_particles(config.prior(), config.n_particles, rng)

    def fmt(vec):
        return " ".join(f"{v:.6f}" for v in vec)

    print(f"prior mean: {fmt(posterior_mean(particles))}")
    step = 0
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        step += 1
        particles = propagate_particles(plant, particles, rng)
        dist = model.classifier.label_distribution(text)
        likelihoods = model.particle_likelihoods([text], particles.states)
        particles, degenerate = update_weights(particles, likelihoods)
        flag = " (uninformative)" if degenerate else ""
        print(f"step {step} estimate: {fmt(posterior_mean(particles))} "
              f"p(q|s): {fmt(dist)}{flag}")
        particles = resample(particles, rng)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lapf",
        description="Particle filtering with natural-language observations")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate and split the synthetic corpus")
    _add_config_arg(p)
    p.add_argument("--corpus-seed", type=int, dest="corpus_seed")
    p.add_argument("--split-seed", type=int, dest="split_seed")
    p.add_argument("--texts-per-level", type=int, dest="texts_per_level")
    p.add_argument("--fractions", help="train,val,test fractions, e.g. 0.792,0.086,0.122")
    p.add_argument("--corpus-path", dest="corpus_path")
    p.add_argument("--ood-bank-path", dest="ood_bank_path")
    p.set_defaults(func=cmd_gen_corpus)

    for name, func in (("train-classifier", cmd_train_classifier),
                       ("train-regressor", cmd_train_regressor)):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} on the corpus train split")
        _add_config_arg(p)
        p.add_argument("--corpus-path", dest="corpus_path")
        p.add_argument("--learning-rate", type=float, dest="learning_rate")
        p.add_argument("--epochs", type=int)
        p.add_argument("--batch-size", type=int, dest="batch_size")
        p.add_argument("--train-seed", type=int, dest="train_seed")
        p.add_argument("--embed-kind", dest="embed_kind", choices=("hashing", "remote"))
        p.add_argument("--embed-features", type=int, dest="embed_features")
        p.add_argument("--embed-endpoint", dest="embed_endpoint")
        p.add_argument("--classifier-path", dest="classifier_path")
        p.add_argument("--regressor-path", dest="regressor_path")
        p.set_defaults(func=func)

    p = sub.add_parser("run", help="run filter trials and write trajectories/metrics")
    _add_config_arg(p)
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--ood", action="store_true", help="inject out-of-domain texts")
    p.add_argument("--trials", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--n-particles", type=int, dest="n_particles")
    p.add_argument("--n-sensors", type=int, dest="n_sensors")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--corpus-path", dest="corpus_path")
    p.add_argument("--classifier-path", dest="classifier_path")
    p.add_argument("--regressor-path", dest="regressor_path")
    p.add_argument("--ood-bank-path", dest="ood_bank_path")
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="merge run metrics into a comparison CSV")
    p.add_argument("metrics", nargs="+", help="metrics JSON files from `run`")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("interactive", help="type observation texts, watch the estimate")
    _add_config_arg(p)
    p.add_argument("--classifier-path", dest="classifier_path")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-particles", type=int, dest="n_particles")
    p.set_defaults(func=cmd_interactive)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, InvalidInputError, CorpusParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except TrainingDivergedError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return FAILURE_EXIT
    except Exception as exc:  # noqa: BLE001 - map unexpected failures to exit 1
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return FAILURE_EXIT


if __name__ == "__main__":
    sys.exit(main())
