"""Training loop, evaluation, and the multi-fold pair-set experiment runner."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .data import PairDataset, kfold_split, load_bonn_set, make_pair_dataset, standardize_dataset
from .errors import ShapeError
from .layers import Model, ModelConfig, flatten_arrays, init_params
from .metrics import MetricsReport, confusion_report
from .optim import AdamState, TrainConfig, adam_step, bce_loss

DECISION_THRESHOLD = 0.5

# The six evaluated set pairs and the model variant used for each.
TABLE_PAIRS = (
    ("A", "E", 1),
    ("B", "E", 1),
    ("C", "E", 1),
    ("D", "E", 1),
    ("A", "D", 2),
    ("B", "D", 2),
)

RESULTS_HEADER = ("pair", "model", "val_acc", "test_acc", "sensitivity", "specificity", "precision", "auc")
CURVES_HEADER = ("fold", "epoch", "train_loss", "val_loss", "val_accuracy")

AGGREGATE_KEYS = ("val_accuracy", "test_accuracy", "sensitivity", "specificity", "precision", "auc")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float


@dataclass
class BestSnapshot:
    """Parameters at the epoch with the highest validation accuracy."""

    epoch: int | None
    val_accuracy: float | None
    flat_params: np.ndarray = field(repr=False, default=None)


@dataclass
class TrainOutcome:
    model: Model
    curves: list
    best: BestSnapshot


@dataclass
class FoldResult:
    fold_index: int
    best_epoch: int | None
    best_val_accuracy: float | None
    val_report: MetricsReport
    test_report: MetricsReport
    best_params: np.ndarray = field(repr=False, default=None)


@dataclass
class ExperimentResult:
    """Per-fold outcomes plus their arithmetic-mean aggregate for one pair."""

    pair: tuple
    variant: int
    seq_len: int
    k: int
    seed: int
    standardized: bool
    train_config: TrainConfig
    folds: list
    curves: list
    aggregate: dict


def _stack(samples):
    if isinstance(samples, PairDataset):
        return samples.values(), samples.labels()
    x = np.stack([s.values for s in samples])
    y = np.array([s.label for s in samples], dtype=np.int64)
    return x, y


def evaluate(model: Model, samples, threshold: float = DECISION_THRESHOLD):
    """Score samples in eval mode and derive metrics at the threshold.

    Returns (MetricsReport, raw scores).
    """
    x, y = _stack(samples)
    if x.shape[1] != model.config.seq_len:
        raise ShapeError(f"samples have length {x.shape[1]}, model expects {model.config.seq_len}")
    scores = model.scores(x)
    return confusion_report(scores, y, threshold), scores


def train_model(config: ModelConfig, tcfg: TrainConfig, split, data: PairDataset) -> TrainOutcome:
    """Seeded mini-batch training with best-checkpoint tracking.

    tcfg.seed is split into two independent streams (weight initialization;
    epoch shuffling + dropout masks), so a run is bit-reproducible. Each
    epoch shuffles the training indices, sweeps mini-batches (final partial
    batch allowed, gradient = mean over the batch), applies one Adam step
    per batch, then records validation loss/accuracy. The parameter snapshot
    with the highest validation accuracy is retained (ties keep the earliest
    epoch).
    """
    x_all, y_all = _stack(data)
    for name, idx in (("train", split.train), ("val", split.val)):
        if len(idx) == 0:
            raise ValueError(f"{name} split is empty")
        if np.max(idx) >= len(data.samples) or np.min(idx) < 0:
            raise ValueError(f"{name} split indexes out of range for {len(data.samples)} samples")

    init_seed, stream_seed = (
        int(s) for s in np.random.SeedSequence(tcfg.seed).generate_state(2, dtype=np.uint64)
    )
    model = init_params(config, init_seed)
    rng = np.random.default_rng(stream_seed)
    adam = AdamState.zeros(model.num_params)
    best = BestSnapshot(epoch=None, val_accuracy=None, flat_params=model.get_flat_params())
    curves = []

    train_idx = np.asarray(split.train)
    val_idx = np.asarray(split.val)
    y_val = y_all[val_idx] == 1
    for epoch in range(1, tcfg.epochs + 1):
        order = train_idx[rng.permutation(train_idx.size)]
        loss_sum = 0.0
        for start in range(0, order.size, tcfg.batch_size):
            batch = order[start : start + tcfg.batch_size]
            probs, cache = model.forward(x_all[batch], train=True, rng=rng)
            losses, dloss = bce_loss(probs, y_all[batch].astype(np.float64))
            grads = model.backward(cache, dloss / batch.size)
            flat, adam = adam_step(model.get_flat_params(), flatten_arrays(grads), adam, tcfg)
            model.set_flat_params(flat)
            loss_sum += float(losses.sum())
        val_scores = model.scores(x_all[val_idx])
        val_losses, _ = bce_loss(val_scores, y_all[val_idx].astype(np.float64))
        val_acc = float(np.mean((val_scores >= DECISION_THRESHOLD) == y_val))
        curves.append(
            EpochRecord(epoch, loss_sum / order.size, float(val_losses.mean()), val_acc)
        )
        if best.val_accuracy is None or val_acc > best.val_accuracy:
            best = BestSnapshot(epoch=epoch, val_accuracy=val_acc, flat_params=model.get_flat_params())
    return TrainOutcome(model=model, curves=curves, best=best)


def fold_train_seed(seed: int, fold_index: int) -> int:
    """Deterministic per-fold training seed derived from (seed, fold_index)."""
    return int(np.random.SeedSequence([seed, fold_index, 1]).generate_state(1, dtype=np.uint64)[0])


def _run_fold(payload):
    config, tcfg, split, data = payload
    outcome = train_model(config, tcfg, split, data)
    model = outcome.model
    model.set_flat_params(outcome.best.flat_params)
    val_report, _ = evaluate(model, data.subset(split.val))
    test_report, _ = evaluate(model, data.subset(split.test))
    result = FoldResult(
        fold_index=split.fold_index,
        best_epoch=outcome.best.epoch,
        best_val_accuracy=outcome.best.val_accuracy,
        val_report=val_report,
        test_report=test_report,
        best_params=outcome.best.flat_params,
    )
    return result, outcome.curves


def _mean_defined(values):
    defined = [v for v in values if v is not None]
    mean = sum(defined) / len(defined) if defined else None
    return mean, len(values) - len(defined)


def aggregate_fold_metrics(folds) -> dict:
    """Arithmetic means over folds; undefined cells are skipped and counted."""
    series = {
        "val_accuracy": [f.best_val_accuracy for f in folds],
        "test_accuracy": [f.test_report.accuracy for f in folds],
        "sensitivity": [f.test_report.sensitivity for f in folds],
        "specificity": [f.test_report.specificity for f in folds],
        "precision": [f.test_report.precision for f in folds],
        "auc": [f.test_report.auc for f in folds],
    }
    agg = {}
    undefined = {}
    for key, values in series.items():
        mean, n_undef = _mean_defined(values)
        agg[key] = mean
        if n_undef:
            undefined[key] = n_undef
    agg["undefined_counts"] = undefined
    return agg


def run_experiment(
    data: PairDataset,
    variant: int,
    k: int,
    seed: int,
    tcfg: TrainConfig,
    jobs: int = 1,
) -> ExperimentResult:
    """Train and evaluate one pair over k independent stratified folds.

    Every fold gets its own split and its own derived training seed; fold
    execution is order-independent, so jobs > 1 runs folds in parallel
    processes with identical results.
    """
    labels = data.labels()
    n = len(data.samples)
    if n % 2 != 0 or not (labels[: n // 2] == 0).all() or not (labels[n // 2 :] == 1).all():
        raise ValueError("dataset must hold equal classes ordered label-0 then label-1")
    splits = kfold_split(data.n_per_class, k, seed)
    config = ModelConfig(variant=variant, seq_len=data.seq_len)
    payloads = [
        (config, replace(tcfg, seed=fold_train_seed(seed, s.fold_index)), s, data) for s in splits
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_run_fold, payloads))
    else:
        outs = [_run_fold(p) for p in payloads]
    outs.sort(key=lambda pair: pair[0].fold_index)
    folds = [r for r, _ in outs]
    curves = [c for _, c in outs]
    return ExperimentResult(
        pair=data.pair,
        variant=variant,
        seq_len=data.seq_len,
        k=k,
        seed=seed,
        standardized=data.standardized,
        train_config=tcfg,
        folds=folds,
        curves=curves,
        aggregate=aggregate_fold_metrics(folds),
    )


def run_reproduction(
    data_root,
    k: int,
    seed: int,
    tcfg: TrainConfig,
    seq_len: int = 4097,
    standardize: bool = False,
    jobs: int = 1,
    progress=None,
):
    """Run the full six-pair grid against an on-disk corpus."""
    loaded = {}
    results = []
    for first, second, variant in TABLE_PAIRS:
        for set_id in (first, second):
            if set_id not in loaded:
                loaded[set_id] = load_bonn_set(data_root, set_id, expected_len=seq_len)
        dataset = make_pair_dataset(loaded[first], loaded[second])
        if standardize:
            dataset = standardize_dataset(dataset)
        if progress:
            progress(f"pair {first}/{second} (model {variant}) ...")
        results.append(run_experiment(dataset, variant, k, seed, tcfg, jobs=jobs))
        if progress:
            agg = results[-1].aggregate
            progress(
                f"pair {first}/{second}: val_acc={_fmt_pct(agg['val_accuracy'])} "
                f"auc={_fmt_auc(agg['auc'])}"
            )
    return results


def _fmt_pct(x) -> str:
    return "NA" if x is None else f"{100.0 * x:.2f}"


def _fmt_auc(x) -> str:
    return "NA" if x is None else f"{x:.4f}"


def results_row(result: ExperimentResult):
    a = result.aggregate
    return [
        "/".join(result.pair),
        str(result.variant),
        _fmt_pct(a["val_accuracy"]),
        _fmt_pct(a["test_accuracy"]),
        _fmt_pct(a["sensitivity"]),
        _fmt_pct(a["specificity"]),
        _fmt_pct(a["precision"]),
        _fmt_auc(a["auc"]),
    ]


def average_row(results):
    """Column-wise mean over pairs, mirroring the summary line of the table."""
    means = {}
    for key in AGGREGATE_KEYS:
        means[key], _ = _mean_defined([r.aggregate[key] for r in results])
    return [
        "average",
        "",
        _fmt_pct(means["val_accuracy"]),
        _fmt_pct(means["test_accuracy"]),
        _fmt_pct(means["sensitivity"]),
        _fmt_pct(means["specificity"]),
        _fmt_pct(means["precision"]),
        _fmt_auc(means["auc"]),
    ]


def write_results_csv(path, results, include_average: bool = False) -> None:
    """CSV with one row per pair: percentages to two decimals, AUC to four."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_HEADER)
        for result in results:
            writer.writerow(results_row(result))
        if include_average:
            writer.writerow(average_row(results))


def write_curves_csv(path, curves_by_fold) -> None:
    """CSV of per-epoch training curves, one block per fold."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVES_HEADER)
        for fold_index, curves in enumerate(curves_by_fold):
            for rec in curves:
                writer.writerow(
                    [fold_index, rec.epoch, repr(rec.train_loss), repr(rec.val_loss), repr(rec.val_accuracy)]
                )


def experiment_to_dict(result: ExperimentResult) -> dict:
    return {
        "pair": "/".join(result.pair),
        "model_variant": result.variant,
        "seq_len": result.seq_len,
        "folds": result.k,
        "seed": result.seed,
        "standardized": result.standardized,
        "train_config": asdict(result.train_config),
        "aggregate": result.aggregate,
        "per_fold": [
            {
                "fold_index": f.fold_index,
                "best_epoch": f.best_epoch,
                "best_val_accuracy": f.best_val_accuracy,
                "val": f.val_report.to_dict(),
                "test": f.test_report.to_dict(),
            }
            for f in result.folds
        ],
        "curves": [[asdict(rec) for rec in fold_curves] for fold_curves in result.curves],
    }


def write_experiment_json(path, results) -> None:
    payload = [experiment_to_dict(r) for r in results]
    if len(payload) == 1:
        payload = payload[0]
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
