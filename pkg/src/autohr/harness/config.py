"""Experiment configuration: flat ``key=value`` files plus flag overrides."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

from autohr.augment import AugmentConfig
from autohr.losses import LossConfig
from autohr.nas.search import SearchConfig

MODES = ("search", "train", "eval", "synth", "baseline", "plot", "derive")
OBJECTIVES = ("overall", "time", "fre")
SEED_ENV = "AUTOHR_SEED"


@dataclass
class ExperimentConfig:
    mode: str = "train"
    dataset: str = ""
    test_dataset: str = ""
    out: str = "runs"
    folds: int = 5
    fold: int = 0
    # training
    clip_length: int = 160
    batch_size: int = 4
    epochs: int = 15
    lr: float = 1e-4
    wd: float = 5e-5
    lambda_time: float = 0.2
    objective: str = "overall"
    da1: bool = True
    da2: bool = True
    initial_channels: int = 16
    genotype: str = "autohr_v1"
    resume: str = ""
    # search
    search_clip_length: int = 128
    search_batch_size: int = 2
    search_epochs: int = 12
    warmup_epochs: int = 5
    search_initial_channels: int = 8
    arch_lr: float = 6e-4
    arch_wd: float = 1e-3
    shared: bool = True
    partial_channel_ratio: float = 1.0
    edge_norm: bool = False
    # evaluation
    checkpoint: str = ""
    eval_clip_seconds: float = 10.0
    results: str = ""
    # synthetic data
    n: int = 64
    subjects: int = 10
    hr_low: float = 50.0
    hr_high: float = 150.0
    fps: float = 30.0
    frames: int = 300
    height: int = 16
    width: int = 16
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}; expected one of {OBJECTIVES}")
        for name in ("folds", "clip_length", "batch_size", "epochs", "search_clip_length",
                     "search_batch_size", "search_epochs", "initial_channels",
                     "search_initial_channels", "n", "subjects", "frames"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 <= self.fold < self.folds:
            raise ValueError(f"fold index {self.fold} not in [0, {self.folds})")
        if self.warmup_epochs < 0:
            raise ValueError("warmup_epochs must be >= 0")

    def loss_config(self) -> LossConfig:
        return LossConfig(lambda_time=self.lambda_time)

    def augment_config(self) -> AugmentConfig:
        return AugmentConfig(seed=self.seed)

    def search_config(self) -> SearchConfig:
        return SearchConfig(
            epochs=self.search_epochs, warmup_epochs=self.warmup_epochs,
            batch_size=self.search_batch_size, clip_length=self.search_clip_length,
            initial_channels=self.search_initial_channels, weight_lr=self.lr, weight_wd=self.wd,
            arch_lr=self.arch_lr, arch_wd=self.arch_wd, lambda_time=self.lambda_time,
            shared=self.shared, partial_channel_ratio=self.partial_channel_ratio,
            edge_norm=self.edge_norm, seed=self.seed,
        )

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def parse_value(name: str, raw: str):
    kind = FIELD_TYPES[name]
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: cannot read {raw!r} as a boolean")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw.strip()


def read_config_file(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in FIELD_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = parse_value(key, value)
    return out


def write_config_file(config: ExperimentConfig, path) -> None:
    lines = []
    for f in fields(config):
        v = getattr(config, f.name)
        lines.append(f"{f.name}={int(v) if isinstance(v, bool) else v}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_config(path=None, overrides: dict | None = None, env=None) -> ExperimentConfig:
    """File values, then explicit overrides, then ``AUTOHR_SEED``."""
    env = os.environ if env is None else env
    values = read_config_file(path) if path else {}
    values.update(overrides or {})
    if env.get(SEED_ENV):
        values["seed"] = int(env[SEED_ENV])
    return ExperimentConfig(**values)
