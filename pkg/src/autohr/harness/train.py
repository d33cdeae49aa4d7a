"""Training loop with per-epoch checkpoints and resume."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import torch

from autohr.augment import sample_rng
from autohr.backbone import NetworkConfig, build_network, load_checkpoint, save_checkpoint
from autohr.data import batches, epoch_samples
from autohr.errors import NonFiniteLossError
from autohr.harness.config import ExperimentConfig
from autohr.harness.tables import TRAIN_LOG, read_table, write_table
from autohr.losses import loss_terms
from autohr.nas.genotype import DiscreteCell, genotype_from_text, preset

log = logging.getLogger(__name__)

BATCH_STREAM = 20


def resolve_genotype(name: str) -> list[DiscreteCell]:
    """A preset name or a path to a genotype text file."""
    path = Path(name)
    if path.is_file():
        return genotype_from_text(path.read_text())
    if path.is_dir() and (path / "genotype.txt").is_file():
        return genotype_from_text((path / "genotype.txt").read_text())
    return [preset(name)]


def checkpoint_dir(out, epoch: int) -> Path:
    return Path(out) / "checkpoints" / f"epoch_{epoch:03d}"


def latest_checkpoint(out) -> Path:
    ckpts = sorted((Path(out) / "checkpoints").glob("epoch_*"))
    if not ckpts:
        raise FileNotFoundError(f"no checkpoints under {Path(out) / 'checkpoints'}")
    return ckpts[-1]


def _optimizer_arrays(opt: torch.optim.Optimizer) -> dict:
    arrays = {}
    for idx, st in opt.state_dict()["state"].items():
        for key, val in st.items():
            arrays[f"optim.{idx}.{key}"] = torch.as_tensor(val)
    return arrays


def _restore_optimizer(opt: torch.optim.Optimizer, extra: dict) -> None:
    sd = opt.state_dict()
    state = {}
    for name, val in extra.items():
        if not name.startswith("optim."):
            continue
        _, idx, key = name.split(".", 2)
        ref = opt.param_groups[0]["params"][int(idx)]
        state.setdefault(int(idx), {})[key] = (
            val.to(torch.float32) if key == "step" else val.to(ref.dtype)
        )
    sd["state"] = state
    opt.load_state_dict(sd)


@dataclass
class TrainResult:
    checkpoint: Path
    log: list = field(default_factory=list)
    net: torch.nn.Module | None = None


def objective(terms: dict, kind: str, lambda_time: float) -> torch.Tensor:
    if kind == "time":
        return terms["time"]
    if kind == "fre":
        return terms["fre"]
    return terms["overall"] if lambda_time > 0 else terms["fre"]


def train(config: ExperimentConfig, records) -> TrainResult:
    """Optimize the network on ``records`` (a list of video records)."""
    records = list(records)
    if not records:
        raise ValueError("no training videos")
    out = Path(config.out)
    loss_cfg = config.loss_config()
    aug_cfg = config.augment_config()
    start_epoch = 0
    rows: list[dict] = []
    if config.resume:
        net, meta, extra = load_checkpoint(config.resume)
        opt = torch.optim.Adam(net.parameters(), lr=config.lr, weight_decay=config.wd)
        _restore_optimizer(opt, extra)
        start_epoch = int(meta["epoch"]) + 1
        log_path = out / "train_log.csv"
        if log_path.exists():
            rows = [r for r in read_table(log_path, TRAIN_LOG) if r["epoch"] < start_epoch]
    else:
        torch.manual_seed(config.seed)
        cells = resolve_genotype(config.genotype)
        net = build_network(NetworkConfig(initial_channels=config.initial_channels, cell=cells))
        opt = torch.optim.Adam(net.parameters(), lr=config.lr, weight_decay=config.wd)

    ckpt = Path(config.resume) if config.resume else None
    for epoch in range(start_epoch, config.epochs):
        net.train()
        samples = epoch_samples(records, config.clip_length, config.seed, epoch, aug_cfg,
                                use_da1=config.da1, use_da2=config.da2)
        sums = {"time": 0.0, "fre": 0.0, "overall": 0.0}
        n = 0
        for step, (x, y, hr, fps) in enumerate(
                batches(samples, config.batch_size, sample_rng(config.seed, BATCH_STREAM, epoch))):
            terms = loss_terms(net(x), y, hr, fps, loss_cfg)
            loss = objective(terms, config.objective, config.lambda_time)
            if not math.isfinite(loss.item()):
                raise NonFiniteLossError(loss.item(), f"epoch {epoch}, step {step}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            for k in sums:
                sums[k] += terms[k].item() * len(hr)
            n += len(hr)
        row = {"epoch": epoch, "L_time": sums["time"] / n, "L_fre": sums["fre"] / n,
               "L_overall": sums["overall"] / n}
        rows.append(row)
        log.info("epoch %d: L_time %.4f L_fre %.4f L_overall %.4f",
                 epoch, row["L_time"], row["L_fre"], row["L_overall"])
        ckpt = save_checkpoint(checkpoint_dir(out, epoch), net, extra=_optimizer_arrays(opt),
                               meta={"epoch": epoch, "seed": config.seed})
        write_table(out / "train_log.csv", TRAIN_LOG, rows)
    if ckpt is None:
        raise ValueError(f"nothing to train: epochs={config.epochs}, start epoch {start_epoch}")
    return TrainResult(ckpt, rows, net)
