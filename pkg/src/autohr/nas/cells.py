"""Cell modules: the relaxed search cell and the derived discrete cell."""
from __future__ import annotations

import torch
import torch.nn as nn

from autohr.errors import ShapeError
from autohr.nas.genotype import EDGES, NUM_INTERMEDIATE, ArchParams, DiscreteCell
from autohr.nas.ops import MixedOp, make_op, op_weights


def channel_shuffle(x: torch.Tensor, groups: int) -> torch.Tensor:
    if groups == 1:
        return x
    b, c = x.shape[:2]
    rest = x.shape[2:]
    return x.view(b, groups, c // groups, *rest).transpose(1, 2).reshape(b, c, *rest)


class PartialMixedOp(nn.Module):
    """Mixed edge applied to ``1/k`` of the channels; the rest bypass it."""

    def __init__(self, channels: int, k: int = 1):
        super().__init__()
        if channels % k:
            raise ValueError(f"{channels} channels not divisible by partial factor {k}")
        self.k = k
        self.mixed = MixedOp(channels // k)

    def forward(self, x, weights):
        if self.k == 1:
            return self.mixed(x, weights)
        c = x.shape[1] // self.k
        out = torch.cat([self.mixed(x[:, :c], weights), x[:, c:]], dim=1)
        return channel_shuffle(out, self.k)


def _edge_norm_weights(beta: torch.Tensor) -> torch.Tensor:
    out = torch.empty_like(beta)
    for j in range(1, NUM_INTERMEDIATE + 1):
        idx = [k for k, (_, dst) in enumerate(EDGES) if dst == j]
        out[idx] = torch.softmax(beta[idx], dim=0)
    return out


class SearchCell(nn.Module):
    """Relaxed cell: every node sums softmax-mixed edges from all earlier nodes."""

    def __init__(self, channels: int, partial_k: int = 1):
        super().__init__()
        self.channels = channels
        self.edges = nn.ModuleList(PartialMixedOp(channels, partial_k) for _ in EDGES)

    def forward(self, x, arch: ArchParams):
        if x.shape[1] != self.channels:
            raise ShapeError(f"cell expects {self.channels} channels, got {x.shape[1]}")
        weights = op_weights(arch.alpha)
        edge_w = None if arch.beta is None else _edge_norm_weights(arch.beta)
        states = [x]
        for j in range(1, NUM_INTERMEDIATE + 1):
            acc = 0
            for k, (i, dst) in enumerate(EDGES):
                if dst != j:
                    continue
                h = self.edges[k](states[i], weights[k])
                acc = acc + (h if edge_w is None else edge_w[k] * h)
            states.append(acc)
        return torch.cat(states[1:], dim=1)


def cell_forward(x: torch.Tensor, arch: ArchParams, cell: SearchCell) -> torch.Tensor:
    return cell(x, arch)


class DiscreteCellModule(nn.Module):
    def __init__(self, channels: int, genotype: DiscreteCell, affine: bool = True):
        super().__init__()
        genotype.validate()
        self.channels = channels
        self.genotype = genotype
        self.ops = nn.ModuleDict(
            {f"{e.src}_{e.dst}": make_op(e.op, channels, affine) for e in genotype.edges}
        )

    def forward(self, x):
        if x.shape[1] != self.channels:
            raise ShapeError(f"cell expects {self.channels} channels, got {x.shape[1]}")
        states = [x]
        for j in range(1, NUM_INTERMEDIATE + 1):
            states.append(
                sum(self.ops[f"{e.src}_{e.dst}"](states[e.src]) for e in self.genotype.inputs(j))
            )
        return torch.cat(states[1:], dim=1)
