"""Candidate operations and the softmax-relaxed mixed edge."""
from __future__ import annotations

import torch
import torch.nn as nn

from autohr.errors import ShapeError
from autohr.tdc import TDConv3d

PRIMITIVES = (
    "none",
    "skip_connect",
    "conv_1x3x3",
    "conv_1x5x5",
    "conv_3x1x1",
    "conv_5x1x1",
    "conv_3x3x3",
    "TDC_3x3x3_0.2",
    "TDC_3x3x3_1.0",
)
NUM_OPS = len(PRIMITIVES)


class Zero(nn.Module):
    def forward(self, x):
        return x.mul(0.0)


class ConvBNReLU(nn.Module):
    """Shape-preserving conv followed by batch norm and ReLU."""

    def __init__(self, conv: nn.Module, channels: int, affine: bool = True):
        super().__init__()
        self.conv = conv
        self.bn = nn.BatchNorm3d(channels, affine=affine)
        self.relu = nn.ReLU(inplace=False)

    def forward(self, x):
        return self.relu(self.bn(self.conv(x)))


def _kernel(name: str):
    kt, kh, kw = (int(v) for v in name.split("_")[1].split("x"))
    return kt, kh, kw


def make_op(name: str, channels: int, affine: bool = True) -> nn.Module:
    if name == "none":
        return Zero()
    if name == "skip_connect":
        return nn.Identity()
    if name.startswith("conv_"):
        k = _kernel(name)
        conv = nn.Conv3d(channels, channels, k, padding=tuple(v // 2 for v in k), bias=False)
        return ConvBNReLU(conv, channels, affine)
    if name.startswith("TDC_3x3x3_"):
        theta = float(name.rsplit("_", 1)[1])
        return ConvBNReLU(TDConv3d(channels, channels, theta=theta), channels, affine)
    raise KeyError(f"unknown operation {name!r}")


def op_weights(alpha_edge: torch.Tensor) -> torch.Tensor:
    if alpha_edge.shape[-1] != NUM_OPS:
        raise ShapeError(f"expected {NUM_OPS} logits per edge, got {alpha_edge.shape[-1]}")
    return torch.softmax(alpha_edge, dim=-1)


class MixedOp(nn.Module):
    """All nine candidates on one edge, combined with softmax weights."""

    def __init__(self, channels: int, affine: bool = False):
        super().__init__()
        self.ops = nn.ModuleList(make_op(name, channels, affine) for name in PRIMITIVES)

    def forward(self, x, weights):
        return sum(w * op(x) for w, op in zip(weights, self.ops))


def mixed_edge_forward(x: torch.Tensor, alpha_edge: torch.Tensor, edge: MixedOp) -> torch.Tensor:
    return edge(x, op_weights(alpha_edge))
