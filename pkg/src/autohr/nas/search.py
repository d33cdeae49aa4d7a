"""First-order bi-level search over the relaxed cell space."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import torch

from autohr.augment import sample_rng
from autohr.backbone import NetworkConfig, RPPGNet, build_network
from autohr.data import batches, epoch_samples
from autohr.errors import NonFiniteLossError
from autohr.losses import LossConfig, loss_terms
from autohr.nas.genotype import ArchParams, DiscreteCell, derive_architecture

log = logging.getLogger(__name__)


@dataclass
class SearchConfig:
    epochs: int = 12
    warmup_epochs: int = 5
    batch_size: int = 2
    clip_length: int = 128
    initial_channels: int = 8
    weight_lr: float = 1e-4
    weight_wd: float = 5e-5
    arch_lr: float = 6e-4
    arch_wd: float = 1e-3
    lambda_time: float = 0.2
    shared: bool = True
    partial_channel_ratio: float = 1.0
    edge_norm: bool = False
    seed: int = 0

    @property
    def partial_k(self) -> int:
        k = round(1.0 / self.partial_channel_ratio)
        if not math.isclose(k * self.partial_channel_ratio, 1.0):
            raise ValueError(f"partial channel ratio must be 1/k, got {self.partial_channel_ratio}")
        return k


@dataclass
class StepLosses:
    train: float
    val: float
    arch_updated: bool


def _finite(loss: torch.Tensor, context: str) -> None:
    v = float(loss.detach())
    if not math.isfinite(v):
        raise NonFiniteLossError(v, context)


def bilevel_step(model, loss_fn, train_batch, val_batch, w_optimizer, a_optimizer,
                 update_arch: bool = True) -> StepLosses:
    """One weight step on the training batch, then one logit step on the validation batch.

    ``loss_fn(model, batch)`` returns a scalar tensor. With ``update_arch``
    false (warm-up) the logits are left untouched and the validation loss is
    only evaluated.
    """
    w_optimizer.zero_grad()
    loss = loss_fn(model, train_batch)
    _finite(loss, "training loss")
    loss.backward()
    w_optimizer.step()

    if not update_arch:
        with torch.no_grad():
            vloss = loss_fn(model, val_batch)
        _finite(vloss, "validation loss")
        return StepLosses(loss.item(), vloss.item(), False)

    a_optimizer.zero_grad()
    vloss = loss_fn(model, val_batch)
    _finite(vloss, "validation loss")
    vloss.backward()
    a_optimizer.step()
    return StepLosses(loss.item(), vloss.item(), True)


def arch_entropy(archs: list[ArchParams]) -> float:
    """Mean Shannon entropy of the per-edge operation softmax."""
    ents = []
    for a in archs:
        p = torch.softmax(a.alpha.detach().double(), dim=-1)
        ents.append(-(p * torch.log(p)).sum(-1))
    return float(torch.cat(ents).mean())


def network_loss(cfg: LossConfig):
    def fn(model, batch):
        x, y, hr, fps = batch
        return loss_terms(model(x), y, hr, fps, cfg)["overall"]
    return fn


@dataclass
class SearchResult:
    cells: list[DiscreteCell]
    trace: list[dict] = field(default_factory=list)
    net: RPPGNet | None = None

    def block_cells(self, blocks: int = 4) -> list[DiscreteCell]:
        return self.cells * blocks if len(self.cells) == 1 else list(self.cells)


def split_halves(records, seed: int):
    records = list(records)
    order = np.random.default_rng(seed).permutation(len(records))
    half = len(records) // 2
    train = [records[i] for i in order[:half]]
    val = [records[i] for i in order[half:]]
    if not train or not val:
        raise ValueError(f"need at least 2 clips to split for search, got {len(records)}")
    return train, val


def search(dataset, config: SearchConfig | None = None, on_epoch=None) -> SearchResult:
    """Warm-up, then alternating weight/logit updates; derives the final cell(s).

    ``on_epoch(epoch, net, row)`` is called after each epoch (e.g. to checkpoint).
    """
    config = config or SearchConfig()
    torch.manual_seed(config.seed)
    train_set, val_set = split_halves(dataset, config.seed)
    net = build_network(NetworkConfig(
        initial_channels=config.initial_channels, cell=None, shared=config.shared,
        partial_k=config.partial_k, edge_norm=config.edge_norm,
    ))
    w_opt = torch.optim.Adam(net.weight_parameters(), lr=config.weight_lr,
                             weight_decay=config.weight_wd)
    a_opt = torch.optim.Adam(net.arch_parameters(), lr=config.arch_lr,
                             weight_decay=config.arch_wd)
    loss_fn = network_loss(LossConfig(lambda_time=config.lambda_time))
    result = SearchResult(cells=[], net=net)
    for epoch in range(config.epochs):
        net.train()
        update = epoch >= config.warmup_epochs
        tr = epoch_samples(train_set, config.clip_length, config.seed, epoch, stream=10)
        va = epoch_samples(val_set, config.clip_length, config.seed, epoch, stream=11)
        rng = sample_rng(config.seed, 12, epoch)
        tb = list(batches(tr, config.batch_size, rng))
        vb = list(batches(va, config.batch_size, rng))
        losses = []
        for k, train_batch in enumerate(tb):
            try:
                losses.append(bilevel_step(net, loss_fn, train_batch, vb[k % len(vb)],
                                           w_opt, a_opt, update_arch=update))
            except NonFiniteLossError as e:
                raise NonFiniteLossError(e.loss, f"search epoch {epoch}, step {k}") from e
        row = {
            "epoch": epoch,
            "arch_updated": int(update),
            "train_loss": float(np.mean([s.train for s in losses])),
            "val_loss": float(np.mean([s.val for s in losses])),
            "entropy": arch_entropy(net.all_arch_params()),
        }
        result.trace.append(row)
        log.info("search epoch %d: %s", epoch, row)
        if on_epoch is not None:
            on_epoch(epoch, net, row)
    result.cells = [derive_architecture(a) for a in net.all_arch_params()]
    return result
