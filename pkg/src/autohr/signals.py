"""Value containers, periodogram heart-rate readout and evaluation metrics.

The periodogram is evaluated at an explicit frequency grid (1 bpm by default)
instead of at FFT bins, so short clips still give one power value per
heart-rate class.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from autohr.errors import InvalidBandError, NoPeakError, ShapeError

HR_BAND = (40.0, 180.0)
HR_STEP = 1.0


@dataclass
class VideoClip:
    """A C x T x H x W grid of intensities in [0, 1] sampled at ``fps``."""

    data: np.ndarray
    fps: float

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 4:
            raise ShapeError(f"clip must be 4-D (C, T, H, W), got shape {self.data.shape}")
        if self.data.shape[0] < 1:
            raise ShapeError("clip needs at least one channel")
        if self.data.shape[1] < 2:
            raise ShapeError(f"clip needs at least 2 frames, got {self.data.shape[1]}")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("clip contains non-finite values")

    @property
    def num_frames(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape


@dataclass
class PulseSignal:
    samples: np.ndarray
    fps: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if self.samples.size < 2:
            raise ShapeError(f"pulse signal needs length >= 2, got {self.samples.size}")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("pulse signal contains non-finite values")

    def __len__(self):
        return self.samples.size

    def save(self, path) -> None:
        """Write as text: a ``fps=<value>`` header, then one sample per line."""
        lines = [f"fps={float(self.fps)!r}"] + [repr(float(v)) for v in self.samples]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "PulseSignal":
        lines = Path(path).read_text().split()
        if not lines or not lines[0].startswith("fps="):
            raise ValueError(f"{path}: missing fps= header")
        fps = float(lines[0][4:])
        return cls(np.array([float(v) for v in lines[1:]]), fps)


@dataclass
class PSDVector:
    freqs_bpm: np.ndarray
    power: np.ndarray


@dataclass
class MetricsReport:
    """Heart-rate error statistics in bpm.

    ``pearson_r`` is ``None`` when either series has zero variance.
    """

    sd: float
    mae: float
    rmse: float
    pearson_r: float | None


def freq_grid(band_bpm: Sequence[float] = HR_BAND, step_bpm: float = HR_STEP) -> np.ndarray:
    low, high = float(band_bpm[0]), float(band_bpm[1])
    if not step_bpm > 0:
        raise InvalidBandError(f"step must be positive, got {step_bpm}")
    if not 0 < low < high:
        raise InvalidBandError(f"invalid band [{low}, {high}]")
    n = int(math.floor((high - low) / step_bpm + 1e-9)) + 1
    return low + step_bpm * np.arange(n, dtype=np.float64)


def check_band(band_bpm, fps: float) -> None:
    low, high = band_bpm
    nyquist_bpm = fps * 60.0 / 2.0
    if not (0 < low < high <= nyquist_bpm):
        raise InvalidBandError(
            f"band [{low}, {high}] bpm not within (0, {nyquist_bpm}] bpm for fps={fps}"
        )


def periodogram(x: torch.Tensor, fps: float, freqs_bpm) -> torch.Tensor:
    """Differentiable explicit-frequency periodogram along the last axis.

    ``x`` has shape (..., T); returns (..., K) with
    ``|sum_t (x_t - mean) exp(-2j pi f_k t / fps)|^2 / T``.
    """
    T = x.shape[-1]
    f_hz = torch.as_tensor(np.asarray(freqs_bpm) / 60.0, dtype=x.dtype, device=x.device)
    t = torch.arange(T, dtype=x.dtype, device=x.device)
    phase = 2 * math.pi * f_hz[:, None] * t[None, :] / fps
    xc = x - x.mean(dim=-1, keepdim=True)
    re = xc @ torch.cos(phase).T
    im = xc @ torch.sin(phase).T
    return (re**2 + im**2) / T


def compute_psd(
    signal: PulseSignal, band_bpm: Sequence[float] = HR_BAND, step_bpm: float = HR_STEP
) -> PSDVector:
    check_band(band_bpm, signal.fps)
    freqs = freq_grid(band_bpm, step_bpm)
    s = signal.samples
    if np.all(s == s[0]):
        # mean removal of a constant can leave rounding residue
        return PSDVector(freqs, np.zeros_like(freqs))
    power = periodogram(torch.from_numpy(s), signal.fps, freqs).numpy()
    return PSDVector(freqs, power)


def estimate_hr(
    signal: PulseSignal, band_bpm: Sequence[float] = HR_BAND, step_bpm: float = HR_STEP
) -> float:
    """Frequency (bpm) of the periodogram peak; ties go to the lower frequency."""
    psd = compute_psd(signal, band_bpm, step_bpm)
    if not np.any(psd.power > 0):
        raise NoPeakError("flat signal: periodogram is zero over the whole band")
    return float(psd.freqs_bpm[int(np.argmax(psd.power))])


def compute_metrics(preds: Sequence[float], gts: Sequence[float]) -> MetricsReport:
    p = np.asarray(preds, dtype=np.float64)
    g = np.asarray(gts, dtype=np.float64)
    if p.shape != g.shape or p.ndim != 1 or p.size == 0:
        raise ValueError(f"need equal nonzero lengths, got {p.shape} and {g.shape}")
    err = p - g
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err**2)))
    sd = float(np.std(err))
    pc, gc = p - p.mean(), g - g.mean()
    denom = math.sqrt(float(np.sum(pc**2)) * float(np.sum(gc**2)))
    if np.all(p == p[0]) or np.all(g == g[0]) or denom == 0:
        r = None
    else:
        r = float(np.clip(np.sum(pc * gc) / denom, -1.0, 1.0))
    return MetricsReport(sd=sd, mae=mae, rmse=rmse, pearson_r=r)


def clip_average_hr(clip_hrs: Sequence[float]) -> float:
    if len(clip_hrs) == 0:
        raise ValueError("cannot average an empty list of clip heart rates")
    return float(np.mean(np.asarray(clip_hrs, dtype=np.float64)))


METRICS_COLUMNS = ["split", "sd", "mae", "rmse", "r"]
UNDEFINED = "undefined"


def write_metrics_csv(path, rows: dict[str, MetricsReport]) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRICS_COLUMNS)
        for split, m in rows.items():
            r = UNDEFINED if m.pearson_r is None else repr(float(m.pearson_r))
            w.writerow([split, repr(float(m.sd)), repr(float(m.mae)), repr(float(m.rmse)), r])
    return Path(path)


def read_metrics_csv(path) -> dict[str, MetricsReport]:
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            r = None if row["r"] == UNDEFINED else float(row["r"])
            out[row["split"]] = MetricsReport(
                sd=float(row["sd"]), mae=float(row["mae"]), rmse=float(row["rmse"]), pearson_r=r
            )
    return out
