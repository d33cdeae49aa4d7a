"""Architecture logits, discrete cells and the derivation rule.

Cell nodes are numbered 0 (input), 1..3 (intermediate nodes B1..B3). The
output node is the channel concatenation of nodes 1..3 and has no edges.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from autohr.errors import InvalidCellError
from autohr.nas.ops import NUM_OPS, PRIMITIVES

NUM_INTERMEDIATE = 3
EDGES = tuple((i, j) for j in range(1, NUM_INTERMEDIATE + 1) for i in range(j))
NUM_EDGES = len(EDGES)


@dataclass
class ArchParams:
    """Relaxed cell: per-edge operation logits and optional edge logits."""

    alpha: torch.Tensor
    beta: torch.Tensor | None = None

    def __post_init__(self):
        if tuple(self.alpha.shape) != (NUM_EDGES, NUM_OPS):
            raise ValueError(f"alpha must be {(NUM_EDGES, NUM_OPS)}, got {tuple(self.alpha.shape)}")
        if self.beta is not None and tuple(self.beta.shape) != (NUM_EDGES,):
            raise ValueError(f"beta must be ({NUM_EDGES},), got {tuple(self.beta.shape)}")
        if not torch.isfinite(self.alpha).all():
            raise ValueError("alpha contains non-finite values")

    @classmethod
    def init(cls, scale=1e-3, edge_norm=False, generator=None, dtype=torch.float32):
        alpha = scale * torch.randn(NUM_EDGES, NUM_OPS, generator=generator, dtype=dtype)
        beta = scale * torch.randn(NUM_EDGES, generator=generator, dtype=dtype) if edge_norm else None
        return cls(alpha, beta)


@dataclass(frozen=True)
class CellEdge:
    dst: int
    src: int
    op: str


@dataclass(frozen=True)
class DiscreteCell:
    edges: tuple[CellEdge, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: (e.dst, e.src))))
        self.validate()

    def validate(self) -> None:
        for e in self.edges:
            if e.op not in PRIMITIVES:
                raise InvalidCellError(f"unknown operation {e.op!r}")
            if e.op == "none":
                raise InvalidCellError(f"edge {e.src}->{e.dst} uses 'none'")
            if not 1 <= e.dst <= NUM_INTERMEDIATE:
                raise InvalidCellError(f"edge target {e.dst} is not an intermediate node")
            if not 0 <= e.src < e.dst:
                raise InvalidCellError(f"edge {e.src}->{e.dst} does not come from an earlier node")
        for node in range(1, NUM_INTERMEDIATE + 1):
            srcs = [e.src for e in self.edges if e.dst == node]
            want = min(node, 2)
            if len(srcs) != want or len(set(srcs)) != want:
                raise InvalidCellError(
                    f"node {node} needs {want} distinct incoming edges, got sources {srcs}"
                )

    def inputs(self, node: int) -> list[CellEdge]:
        return [e for e in self.edges if e.dst == node]

    def to_text(self) -> str:
        return "\n".join(f"node {e.dst} <- {e.op}(node {e.src})" for e in self.edges)

    @classmethod
    def from_text(cls, text: str) -> "DiscreteCell":
        edges = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            m = _LINE.fullmatch(line)
            if m is None:
                raise InvalidCellError(f"cannot parse genotype line {line!r}")
            edges.append(CellEdge(int(m["dst"]), int(m["src"]), m["op"]))
        return cls(tuple(edges))


_LINE = re.compile(r"node\s+(?P<dst>\d+)\s*<-\s*(?P<op>[\w.]+)\(node\s+(?P<src>\d+)\)")


def genotype_to_text(cells: Sequence[DiscreteCell]) -> str:
    """One block per cell; a single shared cell is written without headers."""
    if len(cells) == 1:
        return cells[0].to_text() + "\n"
    parts = [f"# block {k}\n{c.to_text()}" for k, c in enumerate(cells)]
    return "\n".join(parts) + "\n"


def genotype_from_text(text: str) -> list[DiscreteCell]:
    chunks = re.split(r"^#\s*block\s+\d+\s*$", text, flags=re.M)
    chunks = [c for c in chunks if c.strip()]
    return [DiscreteCell.from_text(c) for c in chunks]


def edge_strengths(arch: ArchParams) -> tuple[np.ndarray, np.ndarray]:
    """Best non-none op index per edge and its weight (scaled by edge weights if any)."""
    probs = torch.softmax(arch.alpha.detach().double(), dim=-1).cpu().numpy()
    best = 1 + np.argmax(probs[:, 1:], axis=1)  # first index wins ties
    strength = probs[np.arange(NUM_EDGES), best]
    if arch.beta is not None:
        strength = _edge_weights(arch.beta.detach().double().cpu().numpy()) * strength
    return best, strength


def _edge_weights(beta: np.ndarray) -> np.ndarray:
    out = np.empty(NUM_EDGES)
    for j in range(1, NUM_INTERMEDIATE + 1):
        idx = [k for k, (_, dst) in enumerate(EDGES) if dst == j]
        b = beta[idx] - beta[idx].max()
        out[idx] = np.exp(b) / np.exp(b).sum()
    return out


def derive_architecture(arch: ArchParams) -> DiscreteCell:
    best, strength = edge_strengths(arch)
    edges = []
    for j in range(1, NUM_INTERMEDIATE + 1):
        cand = [(k, EDGES[k][0]) for k in range(NUM_EDGES) if EDGES[k][1] == j]
        # strongest first, lower source node on ties
        cand.sort(key=lambda kc: (-strength[kc[0]], kc[1]))
        for k, src in cand[:2]:
            edges.append(CellEdge(j, src, PRIMITIVES[best[k]]))
    return DiscreteCell(tuple(edges))


PRESETS = {
    # temporal convolutions on the early nodes, spatial on the last one
    "autohr_v1": DiscreteCell(
        (
            CellEdge(1, 0, "conv_3x1x1"),
            CellEdge(2, 1, "conv_5x1x1"),
            CellEdge(2, 0, "skip_connect"),
            CellEdge(3, 2, "conv_1x5x5"),
            CellEdge(3, 0, "skip_connect"),
        )
    ),
}


def preset(name: str) -> DiscreteCell:
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidCellError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
