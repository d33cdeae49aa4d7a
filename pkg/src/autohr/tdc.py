"""Temporal difference convolution (TDC).

A 3x3x3 convolution in which the two temporally adjacent kernel slices see
``I(neighbor) - theta * I(center)`` instead of the raw neighbor value, with
``I(center)`` the input voxel at the output location's own time step.
``theta = 0`` gives an ordinary 3-D convolution.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn as nn
import torch.nn.functional as F

from autohr.errors import ShapeError


def _triple(v):
    if isinstance(v, int):
        return (v, v, v)
    return tuple(int(x) for x in v)


@dataclass
class TDCParams:
    weights: torch.Tensor
    theta: float
    stride: tuple = (1, 1, 1)
    padding: tuple = field(default=(1, 1, 1))

    def __post_init__(self):
        if not 0.0 <= float(self.theta) <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if self.weights.dim() != 5 or tuple(self.weights.shape[2:]) != (3, 3, 3):
            raise ShapeError(
                f"TDC weights must be (C_out, C_in, 3, 3, 3), got {tuple(self.weights.shape)}"
            )
        self.stride = _triple(self.stride)
        self.padding = _triple(self.padding)


def _check_input(x: torch.Tensor, params: TDCParams) -> None:
    if x.dim() != 5:
        raise ShapeError(f"input must be (B, C, T, H, W), got {tuple(x.shape)}")
    if x.shape[1] != params.weights.shape[1]:
        raise ShapeError(
            f"input has {x.shape[1]} channels, weights expect {params.weights.shape[1]}"
        )
    for name, n, p in zip("THW", x.shape[2:], params.padding):
        if n + 2 * p < 3:
            raise ShapeError(f"{name} extent {n} with padding {p} is smaller than the kernel")


def _out_size(n, p, s):
    return (n + 2 * p - 3) // s + 1


def tdc_forward(x: torch.Tensor, params: TDCParams) -> torch.Tensor:
    """Direct evaluation: every kernel tap is visited with its own difference term."""
    _check_input(x, params)
    w, theta = params.weights, float(params.theta)
    (st, sh, sw), (pt, ph, pw) = params.stride, params.padding
    xp = F.pad(x, (pw, pw, ph, ph, pt, pt))
    To, Ho, Wo = (_out_size(n, p, s) for n, p, s in zip(x.shape[2:], params.padding, params.stride))

    def window(dt, dh, dw):
        return xp[
            :, :,
            dt: dt + st * (To - 1) + 1: st,
            dh: dh + sh * (Ho - 1) + 1: sh,
            dw: dw + sw * (Wo - 1) + 1: sw,
        ]

    center = window(1, 1, 1)
    out = x.new_zeros(x.shape[0], w.shape[0], To, Ho, Wo)
    for dt in range(3):
        for dh in range(3):
            for dw in range(3):
                patch = window(dt, dh, dw)
                if dt != 1:
                    patch = patch - theta * center
                out = out + torch.einsum("oi,bithw->bothw", w[:, :, dt, dh, dw], patch)
    return out


def tdc_forward_reparam(x: torch.Tensor, params: TDCParams) -> torch.Tensor:
    """``conv3d(x, w) - theta * conv1x1(center, S_prev + S_next)``."""
    _check_input(x, params)
    w, theta = params.weights, float(params.theta)
    out = F.conv3d(x, w, stride=params.stride, padding=params.padding)
    if theta == 0.0:
        return out
    (pt, ph, pw) = params.padding
    xp = F.pad(x, (pw, pw, ph, ph, pt, pt))
    # the 3x3x3 window starting at padded index s*o has its center at s*o + 1
    centers = F.conv3d(
        xp[:, :, 1:, 1:, 1:],
        (w[:, :, 0] + w[:, :, 2]).sum(dim=(2, 3), keepdim=True)[:, :, None],
        stride=params.stride,
    )
    centers = centers[:, :, : out.shape[2], : out.shape[3], : out.shape[4]]
    return out - theta * centers


class TDConv3d(nn.Module):
    """TDC layer with a fixed theta and learnable 3x3x3 weights."""

    def __init__(self, in_channels, out_channels, theta=0.2, stride=1, padding=1, bias=False):
        super().__init__()
        if not 0.0 <= theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {theta}")
        self.theta = float(theta)
        self.conv = nn.Conv3d(
            in_channels, out_channels, 3, stride=stride, padding=padding, bias=bias
        )

    def params(self) -> TDCParams:
        return TDCParams(self.conv.weight, self.theta, self.conv.stride, self.conv.padding)

    def forward(self, x):
        out = tdc_forward_reparam(x, self.params())
        if self.conv.bias is not None:
            out = out + self.conv.bias.view(1, -1, 1, 1, 1)
        return out

    def extra_repr(self):
        return f"theta={self.theta}"
