"""Strict JSON training configuration."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .data import AugmentationSpec
from .kernels import MEDIAN, KernelSpec
from .loss import COVARIANCE_VARIANTS, LossWeights

# default (alpha, beta, zeta) per kernel
TABLE_WEIGHTS = {
    "linear": (0.5, 2.0, 3.0),
    "rbf": (0.5, 2.0, 2.5),
    "laplacian": (0.5, 2.0, 3.0),
    "rational_quadratic": (0.5, 2.0, 3.0),
    "polynomial": (0.5, 2.0, 3.0),  # no tuned values; reuses the linear row
}

DATASET_KINDS = ("blobs", "moons", "circles", "idx", "csv")


class ConfigError(ValueError):
    pass


@dataclass
class DatasetConfig:
    kind: str = "blobs"
    num_classes: int = 3
    per_class: int = 200
    dim: int = 16
    spread: float = 1.0
    noise_sigma: float = 0.1
    radius_ratio: float = 0.5
    seed: int = 0
    images_path: str | None = None
    labels_path: str | None = None
    csv_path: str | None = None


@dataclass
class ProbeConfig:
    epochs: int = 300
    lr: float = 0.1
    train_fraction: float = 0.8


@dataclass
class TrainConfig:
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    encoder_dims: list = field(default_factory=lambda: [16, 32, 32, 8])
    kernel: KernelSpec = field(default_factory=KernelSpec)
    weights: LossWeights | None = None  # None: pick from TABLE_WEIGHTS by kernel
    batch_size: int = 64
    steps: int = 500
    lr: float = 1e-3
    seed: int = 0
    augmentation: AugmentationSpec = field(default_factory=AugmentationSpec)
    euclidean_baseline: bool = False
    covariance_variant: str = "sqrt"
    output_dir: str = "runs/default"
    log_every: int = 10
    record_wall_time: bool = False
    probe: ProbeConfig = field(default_factory=ProbeConfig)

    def __post_init__(self):
        if self.weights is None:
            a, b, z = TABLE_WEIGHTS[self.kernel.kind]
            self.weights = LossWeights(alpha=a, beta=b, zeta=z)
        self.validate()

    def validate(self):
        if self.batch_size < 2:
            raise ConfigError("batch_size must be >= 2")
        if self.steps < 0:
            raise ConfigError("steps must be >= 0")
        if not self.lr > 0:
            raise ConfigError("lr must be > 0")
        if self.log_every < 1:
            raise ConfigError("log_every must be >= 1")
        if self.covariance_variant not in COVARIANCE_VARIANTS:
            raise ConfigError(f"covariance_variant must be one of {COVARIANCE_VARIANTS}")
        if self.dataset.kind not in DATASET_KINDS:
            raise ConfigError(f"dataset.kind must be one of {DATASET_KINDS}")
        if len(self.encoder_dims) < 2 or any(int(d) != d or d < 1 for d in self.encoder_dims):
            raise ConfigError("encoder_dims must list >= 2 positive integers")
        if self.dataset.kind == "idx":
            for name in ("images_path", "labels_path"):
                path = getattr(self.dataset, name)
                if not path or not Path(path).is_file():
                    raise ConfigError(f"dataset.{name} does not point to a file: {path!r}")
        if self.dataset.kind == "csv" and not (self.dataset.csv_path and Path(self.dataset.csv_path).is_file()):
            raise ConfigError(f"dataset.csv_path does not point to a file: {self.dataset.csv_path!r}")


_HELP = {
    "dataset": f"kind in {list(DATASET_KINDS)}; generator fields apply to the matching kind",
    "encoder_dims": "MLP widths [input, hidden..., embedding]; input must match the data dimension",
    "kernel": "kind in linear|polynomial|rbf|laplacian|rational_quadratic; bandwidth is a gamma > 0 or \"median\"",
    "weights": "alpha (invariance), beta (variance), zeta (covariance), gamma_thresh, epsilon",
    "covariance_variant": "sqrt (HS norm) or squared (squared HS norm)",
    "euclidean_baseline": "true trains with plain VICReg instead of the kernel loss",
    "record_wall_time": "false writes wall_ms=0 so metrics.csv is reproducible bit for bit",
}


def _strict(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key {unknown[0]!r}")
    return data


def from_dict(data: dict) -> TrainConfig:
    data = dict(data)
    data.pop("_help", None)
    _strict(TrainConfig, data, "config")
    kw = dict(data)
    try:
        if "dataset" in kw:
            kw["dataset"] = DatasetConfig(**_strict(DatasetConfig, kw["dataset"], "dataset"))
        if "kernel" in kw:
            kw["kernel"] = KernelSpec(**_strict(KernelSpec, kw["kernel"], "kernel"))
        if "weights" in kw and kw["weights"] is not None:
            kw["weights"] = LossWeights(**_strict(LossWeights, kw["weights"], "weights"))
        if "augmentation" in kw:
            kw["augmentation"] = AugmentationSpec(**_strict(AugmentationSpec, kw["augmentation"], "augmentation"))
        if "probe" in kw:
            kw["probe"] = ProbeConfig(**_strict(ProbeConfig, kw["probe"], "probe"))
        return TrainConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def to_dict(cfg: TrainConfig) -> dict:
    out = dataclasses.asdict(cfg)
    out["kernel"] = dataclasses.asdict(cfg.kernel)
    return out


def load_config(path) -> TrainConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return from_dict(data)


def dump_config(cfg: TrainConfig, path, with_help: bool = True) -> None:
    data = to_dict(cfg)
    if with_help:
        data = {"_help": _HELP, **data}
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def default_config() -> TrainConfig:
    return TrainConfig()


__all__ = ["ConfigError", "DatasetConfig", "ProbeConfig", "TrainConfig", "TABLE_WEIGHTS",
           "from_dict", "to_dict", "load_config", "dump_config", "default_config", "MEDIAN"]
