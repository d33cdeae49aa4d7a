"""Network assembly: stem, four blocks of two cells, inter-block pooling, head.

The same class serves both the search supernet (cells built from the
relaxed search cell, architecture logits held as parameters) and the final
network built from one or four derived cells.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from autohr.errors import InvalidCellError, ShapeError
from autohr.nas.cells import DiscreteCellModule, SearchCell
from autohr.nas.genotype import (
    ArchParams,
    DiscreteCell,
    NUM_EDGES,
    genotype_from_text,
    genotype_to_text,
)
from autohr.nas.ops import NUM_OPS
from autohr.signals import PulseSignal, VideoClip

TEMPORAL_FACTOR = 4
SPATIAL_FACTOR = 8


@dataclass
class NetworkConfig:
    initial_channels: int = 16
    cells_per_block: int = 2
    blocks: int = 4
    pool_strides: list = field(default_factory=lambda: [(1, 2, 2), (2, 2, 2), (2, 2, 2)])
    # one DiscreteCell (shared), a list with one per block, or None for the supernet
    cell: DiscreteCell | Sequence[DiscreteCell] | None = None
    shared: bool = True
    partial_k: int = 1
    edge_norm: bool = False

    def __post_init__(self):
        self.pool_strides = [tuple(int(v) for v in s) for s in self.pool_strides]
        if len(self.pool_strides) != 3:
            raise ValueError(f"need exactly 3 pooling layers, got {len(self.pool_strides)}")
        if self.initial_channels <= 0 or self.cells_per_block <= 0 or self.blocks <= 0:
            raise ValueError("channel and block counts must be positive")

    @property
    def supernet(self) -> bool:
        return self.cell is None

    def block_cells(self) -> list[DiscreteCell]:
        if self.cell is None:
            raise InvalidCellError("supernet config has no discrete cells")
        if isinstance(self.cell, DiscreteCell):
            return [self.cell] * self.blocks
        cells = list(self.cell)
        if len(cells) == 1:
            return cells * self.blocks
        if len(cells) != self.blocks:
            raise InvalidCellError(f"need 1 or {self.blocks} cells, got {len(cells)}")
        for c in cells:
            if not isinstance(c, DiscreteCell):
                raise InvalidCellError(f"not a DiscreteCell: {c!r}")
        return cells


class Projection(nn.Sequential):
    def __init__(self, c_in, c_out):
        super().__init__(nn.Conv3d(c_in, c_out, 1, bias=False), nn.BatchNorm3d(c_out))


class RPPGNet(nn.Module):
    def __init__(self, config: NetworkConfig):
        super().__init__()
        self.config = config
        C = config.initial_channels
        self.stem = nn.Sequential(
            nn.Conv3d(3, C, (1, 5, 5), padding=(0, 2, 2), bias=False),
            nn.BatchNorm3d(C),
            nn.ReLU(),
        )
        if config.supernet:
            n_sets = 1 if config.shared else config.blocks
            self.alphas = nn.ParameterList(
                nn.Parameter(1e-3 * torch.randn(NUM_EDGES, NUM_OPS)) for _ in range(n_sets)
            )
            self.betas = nn.ParameterList(
                nn.Parameter(1e-3 * torch.randn(NUM_EDGES)) for _ in range(n_sets)
            ) if config.edge_norm else None
            make_cell = lambda b: SearchCell(C, config.partial_k)  # noqa: E731
        else:
            cells = config.block_cells()
            make_cell = lambda b: DiscreteCellModule(C, cells[b])  # noqa: E731
        self.blocks = nn.ModuleList()
        for b in range(config.blocks):
            layers = nn.ModuleList()
            for _ in range(config.cells_per_block):
                layers.append(make_cell(b))
                layers.append(Projection(3 * C, C))
            self.blocks.append(layers)
        self.pools = nn.ModuleList(nn.MaxPool3d(s, stride=s) for s in config.pool_strides)
        self.head = nn.Conv1d(C, 1, 1)

    # parameter groups for the two optimizers of the search
    def arch_parameters(self) -> list[nn.Parameter]:
        if not self.config.supernet:
            return []
        params = list(self.alphas)
        if self.betas is not None:
            params += list(self.betas)
        return params

    def weight_parameters(self) -> list[nn.Parameter]:
        arch = {id(p) for p in self.arch_parameters()}
        return [p for p in self.parameters() if id(p) not in arch]

    def arch_params(self, block: int = 0) -> ArchParams:
        k = 0 if self.config.shared else block
        beta = None if self.betas is None else self.betas[k]
        return ArchParams(self.alphas[k], beta)

    def all_arch_params(self) -> list[ArchParams]:
        return [self.arch_params(b) for b in range(len(self.alphas))]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """(B, 3, T, H, W) -> (B, T)."""
        check_input_shape(tuple(x.shape))
        T = x.shape[2]
        h = self.stem(x)
        for b, layers in enumerate(self.blocks):
            arch = self.arch_params(b) if self.config.supernet else None
            for layer in layers:
                if isinstance(layer, SearchCell):
                    h = layer(h, arch)
                else:
                    h = layer(h)
            if b < len(self.pools):
                h = self.pools[b](h)
        h = h.mean(dim=(3, 4))
        h = F.interpolate(h, size=T, mode="linear", align_corners=False)
        return self.head(h)[:, 0]


def check_input_shape(shape) -> None:
    if len(shape) != 5:
        raise ShapeError(f"input must be (B, C, T, H, W), got {shape}")
    _, c, t, h, w = shape
    if c != 3:
        raise ShapeError(f"channels must be 3, got {c}")
    if t % TEMPORAL_FACTOR or t == 0:
        raise ShapeError(f"frames T={t} must be a positive multiple of {TEMPORAL_FACTOR}")
    if h % SPATIAL_FACTOR or h == 0:
        raise ShapeError(f"height H={h} must be a positive multiple of {SPATIAL_FACTOR}")
    if w % SPATIAL_FACTOR or w == 0:
        raise ShapeError(f"width W={w} must be a positive multiple of {SPATIAL_FACTOR}")


def build_network(config: NetworkConfig, seed: int | None = None) -> RPPGNet:
    if not config.supernet:
        for cell in config.block_cells():
            cell.validate()
    if seed is not None:
        with torch.random.fork_rng():
            torch.manual_seed(seed)
            return RPPGNet(config)
    return RPPGNet(config)


def forward(net: RPPGNet, clip: VideoClip) -> PulseSignal:
    param = next(net.parameters())
    x = torch.as_tensor(clip.data, dtype=param.dtype)[None]
    with torch.no_grad():
        y = net(x)[0]
    return PulseSignal(y.double().numpy(), clip.fps)


# -- checkpoints ---------------------------------------------------------

def _meta_from_config(config: NetworkConfig) -> dict:
    return {
        "initial_channels": config.initial_channels,
        "cells_per_block": config.cells_per_block,
        "blocks": config.blocks,
        "pool_strides": ";".join(",".join(map(str, s)) for s in config.pool_strides),
        "supernet": int(config.supernet),
        "shared": int(config.shared),
        "partial_k": config.partial_k,
        "edge_norm": int(config.edge_norm),
    }


def _config_from_meta(meta: dict, cells) -> NetworkConfig:
    pools = [tuple(int(v) for v in s.split(",")) for s in meta["pool_strides"].split(";")]
    return NetworkConfig(
        initial_channels=int(meta["initial_channels"]),
        cells_per_block=int(meta["cells_per_block"]),
        blocks=int(meta["blocks"]),
        pool_strides=pools,
        cell=None if int(meta["supernet"]) else cells,
        shared=bool(int(meta["shared"])),
        partial_k=int(meta["partial_k"]),
        edge_norm=bool(int(meta["edge_norm"])),
    )


def write_arrays(directory, arrays: dict[str, torch.Tensor]) -> None:
    """Flat float64 little-endian blob plus a ``name shape offset`` manifest."""
    directory = Path(directory)
    offset = 0
    lines = []
    with open(directory / "params.bin", "wb") as fh:
        for name, t in arrays.items():
            a = np.ascontiguousarray(t.detach().cpu().double().numpy(), dtype="<f8")
            shape = ",".join(map(str, a.shape)) or "-"
            lines.append(f"{name} {shape} {offset}")
            fh.write(a.tobytes())
            offset += a.nbytes
    (directory / "manifest.txt").write_text("\n".join(lines) + "\n")


def read_arrays(directory) -> dict[str, torch.Tensor]:
    directory = Path(directory)
    blob = (directory / "params.bin").read_bytes()
    out = {}
    for line in (directory / "manifest.txt").read_text().splitlines():
        if not line.strip():
            continue
        name, shape, offset = line.split()
        shape = () if shape == "-" else tuple(int(v) for v in shape.split(","))
        n = int(np.prod(shape)) if shape else 1
        a = np.frombuffer(blob, dtype="<f8", count=n, offset=int(offset)).reshape(shape)
        out[name] = torch.from_numpy(a.copy())
    return out


def read_meta(directory) -> dict:
    meta = {}
    for line in (Path(directory) / "meta.txt").read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    return meta


def save_checkpoint(directory, net: RPPGNet, extra: dict | None = None, meta: dict | None = None,
                    genotype: Sequence[DiscreteCell] | None = None) -> Path:
    """Write genotype text, parameter blob, manifest and key=value metadata.

    For a supernet, ``genotype`` is whatever the caller derived from the
    current logits (the logits themselves are stored as ``alphas.*``).
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if genotype is None and not net.config.supernet:
        cells = net.config.block_cells()
        genotype = [cells[0]] if net.config.shared and all(c == cells[0] for c in cells) else cells
    if genotype is not None:
        (directory / "genotype.txt").write_text(genotype_to_text(genotype))
    arrays = {f"model.{k}": v for k, v in net.state_dict().items()}
    for k, v in (extra or {}).items():
        arrays[k] = v
    write_arrays(directory, arrays)
    all_meta = _meta_from_config(net.config)
    all_meta.update(meta or {})
    (directory / "meta.txt").write_text("".join(f"{k}={v}\n" for k, v in all_meta.items()))
    return directory


def load_checkpoint(directory, dtype=torch.float32):
    """Returns ``(net, meta, extra_arrays)``."""
    directory = Path(directory)
    if not (directory / "manifest.txt").exists():
        raise FileNotFoundError(f"no checkpoint at {directory}")
    meta = read_meta(directory)
    cells = None
    if not int(meta["supernet"]):
        cells = genotype_from_text((directory / "genotype.txt").read_text())
    net = build_network(_config_from_meta(meta, cells))
    arrays = read_arrays(directory)
    state = net.state_dict()
    loaded = {}
    for k, v in state.items():
        src = arrays[f"model.{k}"]
        loaded[k] = src.to(v.dtype) if not v.is_floating_point() else src.to(dtype)
    net.load_state_dict(loaded)
    net.to(dtype)
    extra = {k: v for k, v in arrays.items() if not k.startswith("model.")}
    return net, meta, extra
