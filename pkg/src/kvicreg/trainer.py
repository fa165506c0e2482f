"""Self-supervised training loop, metrics logging, embedding export and probing."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import encoder as enc
from .config import TrainConfig, dump_config
from .data import Dataset, augment_pair, load_idx, make_blobs, make_circles, make_two_moons, read_dataset_csv
from .loss import N_TOP, euclidean_vicreg_loss_and_grad, kernel_vicreg_loss, kernel_vicreg_loss_and_grad, euclidean_vicreg_loss
from .probe import evaluate, fit_probe, split_indices

logger = logging.getLogger(__name__)

METRICS_HEADER = (["step", "total", "invariance", "variance_x", "variance_xp", "covariance_x",
                   "covariance_xp"] + [f"lambda_{i}" for i in range(1, N_TOP + 1)] + ["wall_ms"])
CHECKPOINT_NAME = "checkpoint.kvrg"


def _fmt(x) -> str:
    return format(float(x), ".17g")


def build_dataset(cfg: TrainConfig) -> Dataset:
    d = cfg.dataset
    if d.kind == "blobs":
        return make_blobs(d.num_classes, d.per_class, d.dim, d.spread, d.seed)
    if d.kind == "moons":
        return make_two_moons(d.per_class, d.noise_sigma, d.seed)
    if d.kind == "circles":
        return make_circles(d.per_class, d.noise_sigma, d.radius_ratio, d.seed)
    if d.kind == "idx":
        return load_idx(d.images_path, d.labels_path)
    return read_dataset_csv(d.csv_path)


@dataclass
class TrainResult:
    net: enc.MlpNetwork
    dataset: Dataset
    rows: list = field(default_factory=list)
    embeddings: np.ndarray | None = None


def _loss_and_grad(cfg, zx, zxp):
    if cfg.euclidean_baseline:
        return euclidean_vicreg_loss_and_grad(zx, zxp, cfg.weights)
    return kernel_vicreg_loss_and_grad(cfg.kernel, zx, zxp, cfg.weights, cfg.covariance_variant)


def _loss_only(cfg, zx, zxp):
    if cfg.euclidean_baseline:
        return euclidean_vicreg_loss(zx, zxp, cfg.weights)
    return kernel_vicreg_loss(cfg.kernel, zx, zxp, cfg.weights, cfg.covariance_variant)


def _row(step, report, wall_ms):
    return ([step, report.total, report.invariance, report.variance_x, report.variance_xp,
             report.covariance_x, report.covariance_xp] + list(report.top_eigenvalues) + [wall_ms])


def train(cfg: TrainConfig, write: bool = True) -> TrainResult:
    """Run the SSL loop described by ``cfg``.

    Rows are logged every ``log_every`` iterations from iteration 0, each
    holding the loss computed before that iteration's update, plus one
    final row at ``step == steps`` evaluated on a fresh batch with the
    trained weights. ``steps == 0`` logs nothing.
    """
    ds = build_dataset(cfg)
    n, d = ds.samples.shape
    if cfg.encoder_dims[0] != d:
        raise ValueError(f"encoder input width {cfg.encoder_dims[0]} does not match data dimension {d}")
    if cfg.batch_size > n:
        raise ValueError(f"batch_size {cfg.batch_size} exceeds dataset size {n}")
    net = enc.init(cfg.encoder_dims, cfg.seed)
    state = enc.AdamState.for_network(net, lr=cfg.lr)
    result = TrainResult(net, ds)
    t0 = time.perf_counter()

    for step in range(cfg.steps + 1 if cfg.steps else 0):
        idx = np.random.default_rng((cfg.seed, 0, step)).choice(n, cfg.batch_size, replace=False)
        pair = augment_pair(ds, idx, cfg.augmentation, (cfg.seed, 1, step))
        zx, tape_x = enc.forward(net, pair.view_a)
        zxp, tape_xp = enc.forward(net, pair.view_b)
        wall = (time.perf_counter() - t0) * 1e3 if cfg.record_wall_time else 0.0
        if step == cfg.steps:
            result.rows.append(_row(step, _loss_only(cfg, zx, zxp), wall))
            break
        report, grads = _loss_and_grad(cfg, zx, zxp)
        if step % cfg.log_every == 0:
            result.rows.append(_row(step, report, wall))
            logger.info("step %d total %.6g inv %.4g var %.4g cov %.4g lambda1 %.4g", step, report.total,
                        report.invariance, report.variance_x, report.covariance_x, report.top_eigenvalues[0])
        gx, _ = enc.backward(net, tape_x, grads.grad_x)
        gxp, _ = enc.backward(net, tape_xp, grads.grad_xp)
        enc.adam_step(net, [a + b for a, b in zip(gx, gxp)], state)

    result.embeddings = enc.forward(net, ds.samples)[0]
    if write:
        write_outputs(cfg, result)
    return result


def write_outputs(cfg: TrainConfig, result: TrainResult, out_dir=None) -> Path:
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        for row in result.rows:
            writer.writerow([int(row[0])] + [_fmt(v) for v in row[1:]])
    with open(out / "embeddings.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label"] + [f"e{j}" for j in range(result.embeddings.shape[1])])
        for label, row in zip(result.dataset.labels, result.embeddings):
            writer.writerow([int(label)] + [_fmt(v) for v in row])
    enc.save_checkpoint(result.net, out / CHECKPOINT_NAME)
    dump_config(cfg, out / "config.json", with_help=False)
    return out


def read_metrics(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{k: float(v) for k, v in row.items()} for row in reader]


def probe_checkpoint(cfg: TrainConfig, checkpoint=None, split_seed: int | None = None) -> dict:
    """Fit a linear probe on frozen embeddings; 80/20 seeded split."""
    ds = build_dataset(cfg)
    if ds.num_classes < 2:
        raise ValueError("dataset labels do not span at least two classes")
    net = enc.load_checkpoint(checkpoint or Path(cfg.output_dir) / CHECKPOINT_NAME)
    emb = enc.forward(net, ds.samples)[0]
    return probe_embeddings(emb, ds.labels, ds.num_classes, cfg, cfg.seed if split_seed is None else split_seed)


def probe_embeddings(emb, labels, classes, cfg: TrainConfig, split_seed: int) -> dict:
    train_idx, test_idx = split_indices(len(labels), split_seed, cfg.probe.train_fraction)
    model = fit_probe(emb[train_idx], labels[train_idx], classes, cfg.probe.epochs, cfg.probe.lr, split_seed)
    return {
        "train_accuracy": evaluate(model, emb[train_idx], labels[train_idx]),
        "test_accuracy": evaluate(model, emb[test_idx], labels[test_idx]),
        "n_train": int(train_idx.size),
        "n_test": int(test_idx.size),
        "split_seed": int(split_seed),
    }


def write_probe(result: dict, out_dir) -> Path:
    path = Path(out_dir) / "probe.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(result, indent=2) + "\n")
    return path
