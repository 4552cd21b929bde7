"""Command-line front end: gen, train, eval, repro.

One binary with subcommands sharing the config schema and seeding
discipline.  Results go to stdout, diagnostics to stderr.  Exit codes:
0 success, 2 usage/schema error, 3 generation exhausted, 4 file/format
error, 5 model-vs-labels mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import nn
from .config import ConfigError, load_config, validate_config
from .experiments import EXPERIMENT_IDS, run_experiment, write_metrics_csv
from .pipeline import WidthMismatch, assemble
from .stategen import (
    FormatError,
    GenerationExhausted,
    GenSpec,
    build_dataset,
    read_dataset,
    write_dataset,
)

EXIT_SCHEMA = 2
EXIT_EXHAUSTED = 3
EXIT_FORMAT = 4
EXIT_HEAD_MISMATCH = 5


class HeadMismatch(ValueError):
    """Model head does not match the requested labels."""


def default_out_dir(value=None) -> str:
    return value or os.environ.get("ENTDETECT_OUT", "entdetect_out")


def _merge_config(args, command: str, keys: dict) -> dict:
    """Config file values overlaid by explicitly passed CLI flags."""
    cfg = {}
    if getattr(args, "config", None):
        cfg = validate_config(load_config(args.config), command)
    for key, value in keys.items():
        if value is not None:
            cfg[key] = value
    cfg.pop("command", None)
    return cfg


def cmd_gen(args) -> int:
    cfg = _merge_config(
        args,
        "gen",
        dict(
            family=args.family,
            count=args.count,
            seed=args.seed,
            epsilon=args.epsilon,
            werner_p=args.p,
            negativity_interval=list(args.interval) if args.interval else None,
            out=args.out,
            name=args.name,
        ),
    )
    try:
        spec = GenSpec(
            family=cfg.get("family", ""),
            count=int(cfg.get("count", 0) or 0),
            seed=int(cfg.get("seed", 0) or 0),
            negativity_interval=tuple(cfg["negativity_interval"])
            if cfg.get("negativity_interval")
            else None,
            epsilon=cfg.get("epsilon"),
            werner_p=cfg.get("werner_p"),
            mix_terms_range=tuple(cfg.get("mix_terms_range", (2, 7))),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    out_dir = default_out_dir(cfg.get("out"))
    os.makedirs(out_dir, exist_ok=True)
    from .experiments import _spec_filename

    name = cfg.get("name") or _spec_filename(spec)
    path = os.path.join(out_dir, name)
    ds = build_dataset(spec)
    write_dataset(ds, path)
    stats = dict(
        family=spec.family,
        count=spec.count,
        seed=spec.seed,
        negativity_min=float(np.min(ds.negativities)),
        negativity_mean=float(np.mean(ds.negativities)),
        negativity_max=float(np.max(ds.negativities)),
        entangled_fraction=float(np.mean(ds.binary_labels)),
    )
    sidecar = path + ".meta.json"
    tmp = sidecar + ".tmp"
    with open(tmp, "w") as fh:
        json.dump({"spec": cfg, "oracle": stats}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, sidecar)
    print(path)
    print(
        f"negativity min/mean/max: {stats['negativity_min']:.9f} "
        f"{stats['negativity_mean']:.9f} {stats['negativity_max']:.9f}"
    )
    return 0


def cmd_train(args) -> int:
    cfg = _merge_config(
        args,
        "train",
        dict(
            datasets=args.dataset or None,
            topology=args.topology,
            optimizer=args.optimizer,
            batch_size=args.batch_size,
            max_epochs=args.max_epochs,
            patience=args.patience,
            train_fraction=args.f,
            seed=args.seed,
            out=args.out,
            name=args.name,
            class_labels=_parse_classes(args.classes),
        ),
    )
    datasets = cfg.get("datasets")
    if not datasets:
        raise ConfigError("train requires at least one dataset")
    try:
        tc = nn.TrainConfig(
            batch_size=int(cfg.get("batch_size", 40)),
            train_fraction=float(cfg.get("train_fraction", 0.8)),
            max_epochs=int(cfg.get("max_epochs", 200)),
            patience=int(cfg.get("patience", 10)),
            seed=int(cfg.get("seed", 0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    classes = cfg.get("class_labels")
    split = assemble(datasets, f=tc.train_fraction, seed=tc.seed, class_labels=classes)
    head = "softmax" if classes is not None else "sigmoid"
    topology = nn.parse_topology(cfg.get("topology", "16:8:1"))
    model = nn.glorot_uniform_init(topology, tc.seed, head)
    try:
        best, metrics = nn.fit(
            model,
            (split.train_inputs, split.train_labels),
            (split.test_inputs, split.test_labels),
            tc,
            cfg.get("optimizer", "adam"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out_dir = default_out_dir(cfg.get("out"))
    os.makedirs(out_dir, exist_ok=True)
    name = cfg.get("name", "train")
    ckpt = os.path.join(out_dir, f"{name}.ckpt")
    nn.save_model(best, ckpt)
    write_metrics_csv(
        out_dir,
        name,
        tc.seed,
        dict(
            train_losses=metrics.train_losses,
            test_losses=metrics.test_losses,
            test_asrs=metrics.test_asrs,
            best_epoch=metrics.best_epoch,
            final_asr=metrics.final_asr,
        ),
    )
    print(f"checkpoint: {ckpt}")
    print(f"final test ASR: {metrics.final_asr:.6f}")
    return 0


def _parse_classes(text):
    if text is None:
        return None
    try:
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad class list {text!r}") from exc


def _confusion(model, inputs, labels):
    out = nn.forward(model, inputs)
    if model.output_kind == "sigmoid":
        pred = (out >= 0.5).astype(int)
        true = np.asarray(labels).astype(int)
        k = 2
    else:
        pred = np.argmax(out, axis=1)
        true = np.argmax(labels, axis=1)
        k = 4
    mat = np.zeros((k, k), dtype=int)
    for t, p in zip(true, pred):
        mat[t, p] += 1
    return mat


def cmd_eval(args) -> int:
    cfg = _merge_config(
        args,
        "eval",
        dict(
            model=args.model,
            datasets=args.dataset or None,
            class_labels=_parse_classes(args.classes),
        ),
    )
    if not cfg.get("model") or not cfg.get("datasets"):
        raise ConfigError("eval requires a model and at least one dataset")
    model = nn.load_model(cfg["model"])
    classes = cfg.get("class_labels")
    if model.output_kind == "softmax" and classes is None:
        raise HeadMismatch("softmax model needs --classes to label the datasets")
    if model.output_kind == "sigmoid" and classes is not None:
        raise HeadMismatch("sigmoid model cannot score categorical labels")
    from .experiments import eval_pairs

    inputs, labels = eval_pairs(cfg["datasets"], classes)
    if inputs.shape[1] != model.layer_sizes[0]:
        raise HeadMismatch(
            f"model expects {model.layer_sizes[0]} inputs, datasets have {inputs.shape[1]}"
        )
    score = nn.asr(model, (inputs, labels))
    mat = _confusion(model, inputs, labels)
    print(f"ASR: {score:.6f}")
    print("confusion (rows: true, cols: predicted):")
    for row in mat:
        print("  " + " ".join(f"{v:7d}" for v in row))
    return 0


def cmd_repro(args) -> int:
    cfg = _merge_config(
        args,
        "repro",
        dict(
            experiment=args.experiment,
            scale=args.scale,
            seed=args.seed,
            jobs=args.jobs,
            repetitions=args.reps,
            max_epochs=args.max_epochs,
            out=args.out,
        ),
    )
    exp_id = cfg.get("experiment")
    if exp_id not in EXPERIMENT_IDS:
        raise ConfigError(
            f"unknown experiment {exp_id!r}; choose from {', '.join(EXPERIMENT_IDS)}"
        )
    overrides = {}
    if cfg.get("max_epochs") is not None:
        overrides["max_epochs"] = int(cfg["max_epochs"])
    summary = run_experiment(
        exp_id,
        default_out_dir(cfg.get("out")),
        scale=cfg.get("scale", "full"),
        seed=int(cfg.get("seed", 0)),
        jobs=int(cfg.get("jobs", 1)),
        repetitions=cfg.get("repetitions"),
        **overrides,
    )
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entdetect",
        description="Entanglement dataset generation, MLP training and experiment reproduction.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a labeled dataset file")
    g.add_argument("--config", help="JSON config (see presets/)")
    g.add_argument("--family", help="state family tag, e.g. werner, sep3, random2pure")
    g.add_argument("--count", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--interval", nargs=2, type=float, metavar=("LO", "HI"))
    g.add_argument("--epsilon", type=float)
    g.add_argument("--p", type=float, help="Werner parameter")
    g.add_argument("--out", help="output directory (default $ENTDETECT_OUT)")
    g.add_argument("--name", help="output file name")
    g.set_defaults(fn=cmd_gen)

    t = sub.add_parser("train", help="train an MLP on dataset files")
    t.add_argument("--config")
    t.add_argument("--dataset", action="append", help="dataset file (repeatable)")
    t.add_argument("--topology", help="e.g. 16:8:1")
    t.add_argument("--optimizer", choices=["adam", "rmsprop"])
    t.add_argument("--batch-size", type=int, dest="batch_size")
    t.add_argument("--max-epochs", type=int, dest="max_epochs")
    t.add_argument("--patience", type=int)
    t.add_argument("--f", type=float, help="train fraction")
    t.add_argument("--seed", type=int)
    t.add_argument("--classes", help="comma list: class index per dataset (categorical)")
    t.add_argument("--out")
    t.add_argument("--name", help="basename for checkpoint/metrics")
    t.set_defaults(fn=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint on dataset files")
    e.add_argument("--config")
    e.add_argument("--model")
    e.add_argument("--dataset", action="append")
    e.add_argument("--classes")
    e.set_defaults(fn=cmd_eval)

    r = sub.add_parser("repro", help="reproduce a figure-level experiment")
    r.add_argument("experiment", nargs="?", help="|".join(EXPERIMENT_IDS))
    r.add_argument("--config")
    r.add_argument("--scale", choices=["full", "desk"])
    r.add_argument("--seed", type=int)
    r.add_argument("--jobs", type=int)
    r.add_argument("--reps", type=int)
    r.add_argument("--max-epochs", type=int, dest="max_epochs")
    r.add_argument("--out")
    r.set_defaults(fn=cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except GenerationExhausted as exc:
        print(f"generation exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except HeadMismatch as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return EXIT_HEAD_MISMATCH
    except (FormatError, WidthMismatch, FileNotFoundError) as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
