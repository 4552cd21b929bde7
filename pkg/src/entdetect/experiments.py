"""Scripted, seeded reproductions of the figure-level experiments.

Every experiment is fully determined by (experiment id, scale, base
seed): dataset seeds are derived from canonical descriptor strings,
replicate jobs run single-threaded in a spawn-based process pool (so
results do not depend on the worker count), and all artifacts are
written atomically with 17-significant-digit floats.  Rerunning with the
same configuration reproduces every output byte for byte.

Artifacts per experiment, under the output directory:
  datasets/*.csv             generated state files (cached, reusable)
  models/*.ckpt              detector checkpoints (sweep experiments)
  metrics_<id>_<seed>.csv    per-epoch loss/ASR rows for one replicate
  curve_<id>.csv             aggregated curves (mean + per-replicate)
  summary_<id>.txt           final ASR tables
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from . import nn
from .pipeline import assemble
from .stategen import GenSpec, build_and_write, read_dataset

BINS = [(0.0, 0.1), (0.1, 0.2), (0.2, 0.3), (0.3, 0.4), (0.4, 0.5)]

# Caption topologies; entries whose first element is not the input width
# name hidden layers only, so the 16-wide input (and a 1-wide output when
# missing) is added around them.
TW_PURE_TOPOLOGIES = {
    0: [256, 128, 16, 1],
    1: [128, 16, 1],
    2: [64, 16, 1],
    3: [32, 4, 1],
    4: [16, 4, 1],
}
TW_MIXED_TOPOLOGIES = {
    0: [256, 128, 16, 1],
    1: [128, 16, 1],
    2: [64, 8, 1],
    3: [16, 4, 1],
    4: [16, 1],
}
GENERALIST_TOPOLOGY = [16, 256, 128, 16, 1]
FAMILIES3_TOPOLOGY = [16, 512, 128, 32, 1]
CATEGORICAL_TOPOLOGY = [16, 512, 128, 32, 4]
# Reconstructed sweep-detector nets: two and four hidden layers.
SHALLOW_DETECTOR = [16, 64, 16, 1]
DEEP_DETECTOR = [16, 256, 128, 64, 16, 1]

SWEEP_GRID = [round(0.05 * k, 2) for k in range(21)]

EXPERIMENT_IDS = (
    "fig_sep_vs_bell",
    "tw_to_grid",
    "generalist",
    "epsilon_sweep",
    "werner_sweep",
    "families_binary",
    "cross_family",
    "categorical_runs",
)


def full_topology(sizes) -> list:
    """Normalize a caption topology to input .. hidden .. output."""
    sizes = list(sizes)
    if sizes[0] != 16:
        sizes = [16] + sizes
    if sizes[-1] not in (1, 4):
        sizes = sizes + [1]
    return sizes


@dataclass
class ExperimentSpec:
    """Resolved parameters of one experiment run."""

    id: str
    scale: str = "full"
    seed: int = 0
    jobs: int = 1
    repetitions: int | None = None
    out_dir: str = "entdetect_out"
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.id not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment id {self.id!r}")
        if self.scale not in ("full", "desk"):
            raise ValueError(f"scale must be 'full' or 'desk', got {self.scale!r}")


def _scaled(spec: ExperimentSpec, full_value: int) -> int:
    if spec.scale == "full":
        return full_value
    return max(full_value // int(spec.overrides.get("scale_divisor", 10)), 10)


def _reps(spec: ExperimentSpec, full_reps: int, desk_reps: int) -> int:
    if spec.repetitions is not None:
        return spec.repetitions
    return full_reps if spec.scale == "full" else desk_reps


def dataset_seed(descriptor: str, base_seed: int) -> int:
    """Stable dataset seed from a canonical descriptor string."""
    return (zlib.crc32(descriptor.encode()) + base_seed) % (2**62)


def _spec_filename(gs: GenSpec) -> str:
    parts = [gs.family, f"S{gs.count}", f"seed{gs.seed}"]
    if gs.negativity_interval is not None:
        lo, hi = gs.negativity_interval
        parts.append(f"bin{lo:g}-{hi:g}")
    if gs.epsilon is not None:
        parts.append(f"eps{gs.epsilon:g}")
    if gs.werner_p is not None:
        parts.append(f"p{gs.werner_p:g}")
    return "_".join(parts) + ".csv"


def ensure_dataset(gs: GenSpec, datasets_dir: str) -> str:
    """Build-and-write unless the (deterministic) file already exists."""
    os.makedirs(datasets_dir, exist_ok=True)
    path = os.path.join(datasets_dir, _spec_filename(gs))
    if not os.path.exists(path):
        build_and_write(gs, path)
    return path


def _gen_job(args) -> str:
    gs_fields, datasets_dir = args
    return ensure_dataset(GenSpec(**gs_fields), datasets_dir)


def _genspec_fields(gs: GenSpec) -> dict:
    return dict(
        family=gs.family,
        count=gs.count,
        seed=gs.seed,
        negativity_interval=gs.negativity_interval,
        epsilon=gs.epsilon,
        werner_p=gs.werner_p,
        mix_terms_range=gs.mix_terms_range,
    )


def run_jobs(fn, arg_list, jobs: int = 1):
    """Run jobs on a spawn pool with single-threaded BLAS in each worker.

    Results are ordered like ``arg_list`` regardless of scheduling, and a
    job's computation never depends on the worker count, so experiment
    outputs are invariant under --jobs.
    """
    if not arg_list:
        return []
    saved = {}
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        saved[var] = os.environ.get(var)
        os.environ[var] = "1"
    try:
        with ProcessPoolExecutor(
            max_workers=max(1, jobs), mp_context=get_context("spawn")
        ) as ex:
            return list(ex.map(fn, arg_list))
    finally:
        for var, val in saved.items():
            if val is None:
                os.environ.pop(var, None)
            else:
                os.environ[var] = val


def ensure_datasets(specs, datasets_dir: str, jobs: int = 1) -> list:
    paths, todo, seen = [], [], set()
    for gs in specs:
        path = os.path.join(datasets_dir, _spec_filename(gs))
        paths.append(path)
        if not os.path.exists(path) and path not in seen:
            seen.add(path)
            todo.append((_genspec_fields(gs), datasets_dir))
    run_jobs(_gen_job, todo, jobs)
    return paths


# Worker-local parse cache: pool workers persist across jobs and keep
# re-reading the same dataset files otherwise.  Entries are never mutated.
_DS_CACHE: dict = {}


def _read_cached(path):
    path = os.fspath(path)
    if path not in _DS_CACHE:
        if len(_DS_CACHE) > 8:
            _DS_CACHE.clear()
        _DS_CACHE[path] = read_dataset(path)
    return _DS_CACHE[path]


def eval_pairs(paths, class_labels=None):
    """(inputs, labels) over whole dataset files, for evaluation only."""
    datasets = [_read_cached(p) for p in paths]
    inputs = np.concatenate([ds.features for ds in datasets], axis=0)
    if class_labels is None:
        labels = np.concatenate([ds.binary_labels for ds in datasets]).astype(float)
    else:
        blocks = []
        for ds, c in zip(datasets, class_labels):
            onehot = np.zeros((ds.count, 4))
            onehot[:, int(c)] = 1.0
            blocks.append(onehot)
        labels = np.concatenate(blocks, axis=0)
    return inputs, labels


def _train_job(args: dict) -> dict:
    """One replicate: assemble, fit, evaluate, optionally checkpoint."""
    split = assemble(
        [_read_cached(p) for p in args["train_paths"]],
        f=args["f"],
        seed=args["assemble_seed"],
        class_labels=args.get("class_labels"),
    )
    head = "softmax" if args.get("class_labels") is not None else "sigmoid"
    model = nn.glorot_uniform_init(args["topology"], args["init_seed"], head)
    cfg = nn.TrainConfig(
        batch_size=args["batch_size"],
        train_fraction=args["f"],
        max_epochs=args["max_epochs"],
        patience=args["patience"],
        seed=args["init_seed"],
    )
    best, metrics = nn.fit(
        model,
        (split.train_inputs, split.train_labels),
        (split.test_inputs, split.test_labels),
        cfg,
        args["optimizer"],
    )
    evals = {"holdout": nn.asr(best, (split.test_inputs, split.test_labels))}
    for key, paths, classes in args.get("eval_sets", []):
        evals[key] = nn.asr(best, eval_pairs(paths, classes))
    sweeps = {}
    for key, path in args.get("sweep_sets", []):
        ds = _read_cached(path)
        out = nn.forward(best, ds.features)
        sweeps[key] = float(np.mean(out >= 0.5))
    if args.get("checkpoint"):
        nn.save_model(best, args["checkpoint"])
    return {
        "train_losses": metrics.train_losses,
        "test_losses": metrics.test_losses,
        "test_asrs": metrics.test_asrs,
        "best_epoch": metrics.best_epoch,
        "final_asr": metrics.final_asr,
        "evals": evals,
        "sweeps": sweeps,
    }


def _fmt(x) -> str:
    return f"{x:.17g}"


def _write_atomic(path: str, text: str) -> str:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def write_metrics_csv(out_dir, exp_id, seed, result, header_extra="") -> str:
    lines = [
        f"#entdetect-metrics v1; id={exp_id}; seed={seed}; "
        f"best_epoch={result['best_epoch']}; final_asr={_fmt(result['final_asr'])}"
        + (("; " + header_extra) if header_extra else ""),
        "epoch,train_loss,test_loss,test_asr",
    ]
    for e, (tr, te, a) in enumerate(
        zip(result["train_losses"], result["test_losses"], result["test_asrs"]), 1
    ):
        lines.append(f"{e},{_fmt(tr)},{_fmt(te)},{_fmt(a)}")
    path = os.path.join(out_dir, f"metrics_{exp_id}_{seed}.csv")
    return _write_atomic(path, "\n".join(lines) + "\n")


def _padded_mean(series_list):
    """Mean over replicates, carrying each series' last value forward."""
    n = max(len(s) for s in series_list)
    padded = np.array([list(s) + [s[-1]] * (n - len(s)) for s in series_list])
    return padded.mean(axis=0), padded


def write_curve_csv(out_dir, exp_id, abscissa_name, abscissa, series_list) -> str:
    """Aggregated curve: abscissa, mean, then one column per replicate."""
    mean, padded = _padded_mean(series_list)
    if abscissa is None:
        abscissa = list(range(1, len(mean) + 1))
    cols = ",".join(f"rep{r}" for r in range(len(series_list)))
    lines = [f"{abscissa_name},mean,{cols}"]
    for i, x in enumerate(abscissa):
        vals = ",".join(_fmt(padded[r][i]) for r in range(len(series_list)))
        lines.append(f"{x},{_fmt(mean[i])},{vals}")
    path = os.path.join(out_dir, f"curve_{exp_id}.csv")
    return _write_atomic(path, "\n".join(lines) + "\n")


def write_summary(out_dir, exp_id, text) -> str:
    path = os.path.join(out_dir, f"summary_{exp_id}.txt")
    return _write_atomic(path, text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# Dataset builders shared between experiments


def _bin_dataset_specs(purity: str, bin_idx: int, half: int, base_seed: int) -> list:
    """Sep half plus binned entangled half for one (purity, bin) dataset."""
    lo, hi = BINS[bin_idx]
    if purity == "pure":
        sep = GenSpec("sep2pure", half, dataset_seed(f"sep2pure:b{bin_idx}:S{half}", base_seed))
        ent = GenSpec(
            "random2pure",
            half,
            dataset_seed(f"random2pure:b{bin_idx}:S{half}", base_seed),
            negativity_interval=(lo, hi),
        )
    else:
        sep = GenSpec("sep2mixed", half, dataset_seed(f"sep2mixed:b{bin_idx}:S{half}", base_seed))
        ent = GenSpec(
            "random2mixed",
            half,
            dataset_seed(f"random2mixed:b{bin_idx}:S{half}", base_seed),
            negativity_interval=(lo, hi),
        )
    return [sep, ent]


def _detector_train_specs(half_each: int, base_seed: int) -> list:
    """Arbitrary-negativity training set: uniform over bins, pure and mixed."""
    specs = [
        GenSpec("sep2pure", 5 * half_each, dataset_seed(f"det:sep2pure:S{5 * half_each}", base_seed)),
        GenSpec("sep2mixed", 5 * half_each, dataset_seed(f"det:sep2mixed:S{5 * half_each}", base_seed)),
    ]
    for b, (lo, hi) in enumerate(BINS):
        specs.append(
            GenSpec(
                "random2pure",
                half_each,
                dataset_seed(f"det:random2pure:b{b}:S{half_each}", base_seed),
                negativity_interval=(lo, hi),
            )
        )
        specs.append(
            GenSpec(
                "random2mixed",
                half_each,
                dataset_seed(f"det:random2mixed:b{b}:S{half_each}", base_seed),
                negativity_interval=(lo, hi),
            )
        )
    return specs


# ---------------------------------------------------------------------------
# Experiments


def run_sep_vs_bell(spec: ExperimentSpec) -> dict:
    """Maximally-entangled-vs-separable learning curve (two-qubit pure)."""
    out = spec.out_dir
    os.makedirs(out, exist_ok=True)
    half = _scaled(spec, 10_000)
    reps = _reps(spec, 100, 20)
    max_epochs = int(spec.overrides.get("max_epochs", 30 if spec.scale == "full" else 100))
    dsets = [
        GenSpec("sep2pure", half, dataset_seed(f"fig2:sep:S{half}", spec.seed)),
        GenSpec("bellrandom", half, dataset_seed(f"fig2:bell:S{half}", spec.seed)),
    ]
    paths = ensure_datasets(dsets, os.path.join(out, "datasets"), spec.jobs)
    jobs = [
        dict(
            train_paths=paths,
            f=0.8,
            assemble_seed=spec.seed * 1000 + 7 + r,
            topology=[16, 8, 1],
            optimizer="rmsprop",
            batch_size=int(spec.overrides.get("batch_size", 40)),
            max_epochs=max_epochs,
            patience=10,
            init_seed=spec.seed * 1000 + 500 + r,
        )
        for r in range(reps)
    ]
    results = run_jobs(_train_job, jobs, spec.jobs)
    for job, res in zip(jobs, results):
        write_metrics_csv(out, spec.id, job["init_seed"], res)
    write_curve_csv(out, spec.id, "epoch", None, [r["test_losses"] for r in results])
    final_asrs = [r["final_asr"] for r in results]
    epochs_to_99 = [
        next((e + 1 for e, a in enumerate(r["test_asrs"]) if a >= 0.99), None)
        for r in results
    ]
    summary = dict(
        mean_final_asr=float(np.mean(final_asrs)),
        min_final_asr=float(np.min(final_asrs)),
        epochs_to_99=epochs_to_99,
        repetitions=reps,
    )
    write_summary(
        out,
        spec.id,
        f"sep-vs-bell ({spec.scale}): mean final ASR {summary['mean_final_asr']:.6f} "
        f"over {reps} replicates (min {summary['min_final_asr']:.6f})\n"
        f"epochs to reach ASR>=0.99 per replicate: {epochs_to_99}",
    )
    return summary


def _tw_eval_sets(bin_paths: dict) -> list:
    return [
        (f"{purity}:b{b}", bin_paths[(purity, b)], None)
        for purity in ("pure", "mixed")
        for b in range(5)
    ]


def run_tw_to_grid(spec: ExperimentSpec) -> dict:
    """Train-on-bin / test-on-bin ASR grids for pure and mixed states."""
    out = spec.out_dir
    os.makedirs(out, exist_ok=True)
    half = _scaled(spec, 10_000)
    reps = _reps(spec, 10, 3)
    datasets_dir = os.path.join(out, "datasets")
    all_specs, bin_paths = [], {}
    for purity in ("pure", "mixed"):
        for b in range(5):
            pair = _bin_dataset_specs(purity, b, half, spec.seed)
            all_specs.extend(pair)
            bin_paths[(purity, b)] = [os.path.join(datasets_dir, _spec_filename(g)) for g in pair]
    ensure_datasets(all_specs, datasets_dir, spec.jobs)

    eval_sets = _tw_eval_sets(bin_paths)
    jobs, keys = [], []
    for purity in ("pure", "mixed"):
        topos = TW_PURE_TOPOLOGIES if purity == "pure" else TW_MIXED_TOPOLOGIES
        for b in range(5):
            for r in range(reps):
                keys.append((purity, b, r))
                jobs.append(
                    dict(
                        train_paths=bin_paths[(purity, b)],
                        f=0.8,
                        assemble_seed=spec.seed * 1000 + 31 * b + r,
                        topology=full_topology(topos[b]),
                        optimizer="rmsprop",
                        batch_size=int(spec.overrides.get("batch_size", 40)),
                        max_epochs=int(spec.overrides.get("max_epochs", 200)),
                        patience=10,
                        init_seed=spec.seed * 1000 + 997 * (b + 1) + (0 if purity == "pure" else 449) + r,
                        eval_sets=eval_sets,
                    )
                )
    results = run_jobs(_train_job, jobs, spec.jobs)

    grids = {}  # (tw_purity, to_purity) -> 5x5 mean ASR
    for tw_purity in ("pure", "mixed"):
        for to_purity in ("pure", "mixed"):
            grids[(tw_purity, to_purity)] = np.zeros((5, 5))
    for (purity, b, r), job, res in zip(keys, jobs, results):
        write_metrics_csv(out, f"{spec.id}-{purity}-b{b}", job["init_seed"], res)
        for to_purity in ("pure", "mixed"):
            for tb in range(5):
                same = to_purity == purity and tb == b
                cell = res["evals"]["holdout" if same else f"{to_purity}:b{tb}"]
                grids[(purity, to_purity)][b, tb] += cell / reps

    lines = []
    for (twp, top), g in grids.items():
        lines.append(f"TW {twp} / TO {top} (rows: TW bins, cols: TO bins)")
        for b in range(5):
            lines.append("  " + " ".join(f"{g[b, t]:.4f}" for t in range(5)))
    write_summary(out, spec.id, "\n".join(lines))
    return {f"{twp}->{top}": g.tolist() for (twp, top), g in grids.items()}


def run_generalist(spec: ExperimentSpec) -> dict:
    """Detector trained on minimally entangled pure+mixed states."""
    out = spec.out_dir
    os.makedirs(out, exist_ok=True)
    quarter = _scaled(spec, 10_000)
    reps = _reps(spec, 10, 3)
    datasets_dir = os.path.join(out, "datasets")
    train_specs = [
        GenSpec("sep2pure", quarter, dataset_seed(f"gen:sep2pure:S{quarter}", spec.seed)),
        GenSpec("sep2mixed", quarter, dataset_seed(f"gen:sep2mixed:S{quarter}", spec.seed)),
        GenSpec(
            "random2pure",
            quarter,
            dataset_seed(f"gen:random2pure:S{quarter}", spec.seed),
            negativity_interval=BINS[0],
        ),
        GenSpec(
            "random2mixed",
            quarter,
            dataset_seed(f"gen:random2mixed:S{quarter}", spec.seed),
            negativity_interval=BINS[0],
        ),
    ]
    train_paths = ensure_datasets(train_specs, datasets_dir, spec.jobs)
    half = _scaled(spec, 10_000)
    eval_specs, bin_paths = [], {}
    for purity in ("pure", "mixed"):
        for b in range(5):
            pair = _bin_dataset_specs(purity, b, half, spec.seed)
            eval_specs.extend(pair)
            bin_paths[(purity, b)] = [os.path.join(datasets_dir, _spec_filename(g)) for g in pair]
    ensure_datasets(eval_specs, datasets_dir, spec.jobs)

    jobs = [
        dict(
            train_paths=train_paths,
            f=0.8,
            assemble_seed=spec.seed * 1000 + 211 + r,
            topology=GENERALIST_TOPOLOGY,
            optimizer="rmsprop",
            batch_size=int(spec.overrides.get("batch_size", 40)),
            max_epochs=int(spec.overrides.get("max_epochs", 200)),
            patience=10,
            init_seed=spec.seed * 1000 + 600 + r,
            eval_sets=_tw_eval_sets(bin_paths),
        )
        for r in range(reps)
    ]
    results = run_jobs(_train_job, jobs, spec.jobs)
    for job, res in zip(jobs, results):
        write_metrics_csv(out, spec.id, job["init_seed"], res)

    table = {}
    for purity in ("pure", "mixed"):
        for b in range(5):
            key = f"{purity}:b{b}"
            table[key] = float(np.mean([r["evals"][key] for r in results]))
    lines = ["generalist mean ASR per test set:"]
    for key, v in table.items():
        lines.append(f"  {key}: {v:.4f}")
    write_summary(out, spec.id, "\n".join(lines))
    return table


def _ensure_detectors(spec: ExperimentSpec, variants, reps: int) -> dict:
    """Train (or reuse) the sweep detector checkpoints; returns paths."""
    out = spec.out_dir
    datasets_dir = os.path.join(out, "datasets")
    models_dir = os.path.join(out, "models")
    os.makedirs(models_dir, exist_ok=True)
    half_each = _scaled(spec, 2_000)
    train_specs = _detector_train_specs(half_each, spec.seed)
    train_paths = ensure_datasets(train_specs, datasets_dir, spec.jobs)

    paths, jobs = {}, []
    for variant in variants:
        topology = SHALLOW_DETECTOR if variant == "two_hidden" else DEEP_DETECTOR
        for r in range(reps):
            ckpt = os.path.join(models_dir, f"detector_{variant}_{spec.scale}_s{spec.seed}_rep{r}.ckpt")
            paths[(variant, r)] = ckpt
            if not os.path.exists(ckpt):
                jobs.append(
                    dict(
                        train_paths=train_paths,
                        f=0.8,
                        assemble_seed=spec.seed * 1000 + 77 + r,
                        topology=topology,
                        optimizer="rmsprop",
                        batch_size=int(spec.overrides.get("batch_size", 40)),
                        max_epochs=int(spec.overrides.get("max_epochs", 200)),
                        patience=10,
                        init_seed=spec.seed * 1000 + (0 if variant == "two_hidden" else 50) + 800 + r,
                        checkpoint=ckpt,
                    )
                )
    run_jobs(_train_job, jobs, spec.jobs)
    return paths


def _sweep_eval(ckpt_paths, point_paths) -> dict:
    """Detection probability per (variant, rep) per sweep point."""
    curves = {}
    for (variant, r), ckpt in ckpt_paths.items():
        model = nn.load_model(ckpt)
        vals = []
        for path in point_paths:
            ds = read_dataset(path)
            vals.append(float(np.mean(nn.forward(model, ds.features) >= 0.5)))
        curves.setdefault(variant, []).append(vals)
    return curves


def run_epsilon_sweep(spec: ExperimentSpec) -> dict:
    """Detection probability on noise-interpolation states vs epsilon."""
    out = spec.out_dir
    os.makedirs(out, exist_ok=True)
    reps = _reps(spec, 10, 3)
    n_point = _scaled(spec, 1_000)
    datasets_dir = os.path.join(out, "datasets")
    detectors = _ensure_detectors(spec, ("two_hidden", "four_hidden"), reps)

    summary = {}
    for kind in ("pure", "mixed"):
        fam = "epsilonpure" if kind == "pure" else "epsilonmixed"
        point_specs = [
            GenSpec(
                fam,
                n_point,
                dataset_seed(f"sweep:{fam}:e{e}:S{n_point}", spec.seed),
                epsilon=e,
            )
            for e in SWEEP_GRID
        ]
        point_paths = ensure_datasets(point_specs, datasets_dir, spec.jobs)
        curves = _sweep_eval(detectors, point_paths)
        for variant, series in curves.items():
            write_curve_csv(
                out, f"{spec.id}-{kind}-{variant}", "epsilon", SWEEP_GRID, series
            )
            summary[f"{kind}:{variant}"] = list(np.mean(series, axis=0))
    lines = ["epsilon sweep mean detection probability:"]
    for key, vals in summary.items():
        lines.append(f"  {key}: " + " ".join(f"{v:.3f}" for v in vals))
    write_summary(out, spec.id, "\n".join(lines))
    return summary


def run_werner_sweep(spec: ExperimentSpec) -> dict:
    """Detection probability on Werner states vs p."""
    out = spec.out_dir
    os.makedirs(out, exist_ok=True)
    reps = _reps(spec, 10, 3)
    n_point = _scaled(spec, 1_000)
    datasets_dir = os.path.join(out, "datasets")
    detectors = _ensure_detectors(spec, ("two_hidden", "four_hidden"), reps)
    point_specs = [
        GenSpec(
            "werner",
            n_point,
            dataset_seed(f"sweep:werner:p{p}:S{n_point}", spec.seed),
            werner_p=p,
        )
        for p in SWEEP_GRID
    ]
    point_paths = ensure_datasets(point_specs, datasets_dir, spec.jobs)
    curves = _sweep_eval(detectors, point_paths)
    summary = {}
    for variant, series in curves.items():
        write_curve_csv(out, f"{spec.id}-{variant}", "p", SWEEP_GRID, series)
        summary[variant] = list(np.mean(series, axis=0))
    lines = ["werner sweep mean detection probability:"]
    for key, vals in summary.items():
        lines.append(f"  {key}: " + " ".join(f"{v:.3f}" for v in vals))
    write_summary(out, spec.id, "\n".join(lines))
    return summary


FAMILY3_TAGS = ("be3", "ghz3", "w3")


def _family3_paths(spec: ExperimentSpec, half: int):
    datasets_dir = os.path.join(spec.out_dir, "datasets")
    sep = GenSpec("sep3", half, dataset_seed(f"fam3:sep3:S{half}", spec.seed))
    specs = {fam: GenSpec(fam, half, dataset_seed(f"fam3:{fam}:S{half}", spec.seed)) for fam in FAMILY3_TAGS}
    ensure_datasets([sep] + list(specs.values()), datasets_dir, spec.jobs)
    sep_path = os.path.join(datasets_dir, _spec_filename(sep))
    return sep_path, {fam: os.path.join(datasets_dir, _spec_filename(g)) for fam, g in specs.items()}


def _families_core(spec: ExperimentSpec):
    half = _scaled(spec, 100_000)
    reps = _reps(spec, 10, 3)
    sep_path, fam_paths = _family3_paths(spec, half)
    eval_sets = [(fam, [sep_path, fam_paths[fam]], None) for fam in FAMILY3_TAGS]
    jobs, keys = [], []
    for fi, fam in enumerate(FAMILY3_TAGS):
        for r in range(reps):
            keys.append((fam, r))
            jobs.append(
                dict(
                    train_paths=[sep_path, fam_paths[fam]],
                    f=0.75,
                    assemble_seed=spec.seed * 1000 + 53 * fi + r,
                    topology=FAMILIES3_TOPOLOGY,
                    optimizer="adam",
                    batch_size=int(spec.overrides.get("batch_size", 40)),
                    max_epochs=int(spec.overrides.get("max_epochs", 200)),
                    patience=10,
                    init_seed=spec.seed * 1000 + 100 * (fi + 1) + r,
                    eval_sets=eval_sets,
                )
            )
    results = run_jobs(_train_job, jobs, spec.jobs)
    return keys, jobs, results, reps


def run_families_binary(spec: ExperimentSpec) -> dict:
    """Per-family binary detection curves plus the cross-family ASR matrix."""
    out = spec.out_dir
    os.makedirs(out, exist_ok=True)
    keys, jobs, results, reps = _families_core(spec)
    by_family = {fam: [] for fam in FAMILY3_TAGS}
    for (fam, r), job, res in zip(keys, jobs, results):
        write_metrics_csv(out, f"{spec.id}-{fam}", job["init_seed"], res)
        by_family[fam].append(res)
    summary = {}
    for fam in FAMILY3_TAGS:
        rs = by_family[fam]
        write_curve_csv(out, f"{spec.id}-{fam}", "epoch", None, [r["test_losses"] for r in rs])
        summary[f"{fam}:best_bce"] = float(np.mean([min(r["test_losses"]) for r in rs]))
        summary[f"{fam}:asr"] = float(np.mean([r["final_asr"] for r in rs]))
    matrix = np.zeros((3, 3))
    for (fam, r), res in zip(keys, results):
        fi = FAMILY3_TAGS.index(fam)
        for ti, tfam in enumerate(FAMILY3_TAGS):
            cell = res["evals"]["holdout" if tfam == fam else tfam]
            matrix[fi, ti] += cell / reps
    summary["cross_matrix"] = matrix.tolist()
    lines = ["three-qubit binary families (rows: trained on, cols: tested on)"]
    for fi, fam in enumerate(FAMILY3_TAGS):
        lines.append(f"  {fam}: " + " ".join(f"{matrix[fi, t]:.4f}" for t in range(3)))
    lines.append("")
    for fam in FAMILY3_TAGS:
        lines.append(
            f"{fam}: mean best test BCE {summary[f'{fam}:best_bce']:.4f}, "
            f"mean ASR {summary[f'{fam}:asr']:.4f}"
        )
    write_summary(out, spec.id, "\n".join(lines))
    return summary


def run_cross_family(spec: ExperimentSpec) -> dict:
    """Cross-family generalization matrix (standalone artifact)."""
    out = spec.out_dir
    os.makedirs(out, exist_ok=True)
    keys, _, results, reps = _families_core(spec)
    matrix = np.zeros((3, 3))
    for (fam, r), res in zip(keys, results):
        fi = FAMILY3_TAGS.index(fam)
        for ti, tfam in enumerate(FAMILY3_TAGS):
            matrix[fi, ti] += res["evals"]["holdout" if tfam == fam else tfam] / reps
    lines = ["cross-family ASR (rows: trained on, cols: tested on)"]
    for fi, fam in enumerate(FAMILY3_TAGS):
        lines.append(f"  {fam}: " + " ".join(f"{matrix[fi, t]:.4f}" for t in range(3)))
    write_summary(out, spec.id, "\n".join(lines))
    return {"cross_matrix": matrix.tolist()}


def run_categorical(spec: ExperimentSpec) -> dict:
    """Four-way classification over {sep3, be3, ghz3, w3}."""
    out = spec.out_dir
    os.makedirs(out, exist_ok=True)
    quarter = _scaled(spec, 100_000)
    runs = _reps(spec, 10, 3)
    datasets_dir = os.path.join(out, "datasets")
    specs = [
        GenSpec("sep3", quarter, dataset_seed(f"cat:sep3:S{quarter}", spec.seed)),
        GenSpec("be3", quarter, dataset_seed(f"cat:be3:S{quarter}", spec.seed)),
        GenSpec("ghz3", quarter, dataset_seed(f"cat:ghz3:S{quarter}", spec.seed)),
        GenSpec("w3", quarter, dataset_seed(f"cat:w3:S{quarter}", spec.seed)),
    ]
    paths = ensure_datasets(specs, datasets_dir, spec.jobs)
    jobs = [
        dict(
            train_paths=paths,
            class_labels=[0, 1, 2, 3],
            f=0.75,
            assemble_seed=spec.seed * 1000 + 19 + r,
            topology=CATEGORICAL_TOPOLOGY,
            optimizer="adam",
            batch_size=int(spec.overrides.get("batch_size", 1000)),
            max_epochs=int(spec.overrides.get("max_epochs", 200)),
            patience=10,
            init_seed=spec.seed * 1000 + 300 + r,
        )
        for r in range(runs)
    ]
    results = run_jobs(_train_job, jobs, spec.jobs)
    for job, res in zip(jobs, results):
        write_metrics_csv(out, spec.id, job["init_seed"], res)
    write_curve_csv(out, spec.id, "epoch", None, [r["test_losses"] for r in results])
    asrs = [r["final_asr"] for r in results]
    # histogram over runs, 5%-wide buckets
    edges = np.arange(0.0, 1.05, 0.05)
    hist, _ = np.histogram(asrs, bins=edges)
    lines = ["asr_bucket_low,asr_bucket_high,runs"]
    for i in range(len(hist)):
        lines.append(f"{_fmt(edges[i])},{_fmt(edges[i + 1])},{hist[i]}")
    _write_atomic(os.path.join(out, f"histogram_{spec.id}.csv"), "\n".join(lines) + "\n")
    summary = dict(
        per_run_asr=[float(a) for a in asrs],
        mean_asr=float(np.mean(asrs)),
        best_asr=float(np.max(asrs)),
        worst_asr=float(np.min(asrs)),
    )
    write_summary(
        out,
        spec.id,
        f"categorical 4-way over {runs} runs: mean ASR {summary['mean_asr']:.4f}, "
        f"best {summary['best_asr']:.4f}, worst {summary['worst_asr']:.4f}\n"
        f"per-run: {[round(a, 4) for a in asrs]}",
    )
    return summary


RUNNERS = {
    "fig_sep_vs_bell": run_sep_vs_bell,
    "tw_to_grid": run_tw_to_grid,
    "generalist": run_generalist,
    "epsilon_sweep": run_epsilon_sweep,
    "werner_sweep": run_werner_sweep,
    "families_binary": run_families_binary,
    "cross_family": run_cross_family,
    "categorical_runs": run_categorical,
}


def run_experiment(exp_id, out_dir, scale="full", seed=0, jobs=1, repetitions=None, **overrides) -> dict:
    spec = ExperimentSpec(
        id=exp_id,
        scale=scale,
        seed=seed,
        jobs=jobs,
        repetitions=repetitions,
        out_dir=os.fspath(out_dir),
        overrides=overrides,
    )
    return RUNNERS[exp_id](spec)
