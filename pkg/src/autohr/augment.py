"""Spatio-temporal tube cutout/erase (DA1) and heart-rate resampling (DA2)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from autohr.errors import TooShortError
from autohr.signals import HR_BAND, PulseSignal, VideoClip


@dataclass
class AugmentConfig:
    max_spatial_area_frac: float = 0.2
    max_temporal_frac: float = 0.2
    da2_upsample_threshold_bpm: float = 90.0
    da2_downsample_threshold_bpm: float = 70.0
    seed: int = 0

    def __post_init__(self):
        for name in ("max_spatial_area_frac", "max_temporal_frac"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        lo, hi = HR_BAND
        for name in ("da2_upsample_threshold_bpm", "da2_downsample_threshold_bpm"):
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ValueError(f"{name}={v} outside [{lo}, {hi}]")


def sample_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream per (seed, *keys), e.g. keyed on a sample index."""
    return np.random.default_rng([seed, *keys])


def sample_tube(shape, cfg: AugmentConfig, rng: np.random.Generator):
    """Draw a tube as ``(t0, t1, y0, y1, x0, x1)``; may be empty."""
    _, T, H, W = shape
    length = int(math.floor(rng.uniform(0, cfg.max_temporal_frac) * T))
    area = rng.uniform(0, cfg.max_spatial_area_frac) * H * W
    aspect = math.exp(rng.uniform(math.log(0.5), math.log(2.0)))
    h = min(H, int(math.floor(math.sqrt(area * aspect))))
    w = min(W, int(math.floor(area / h))) if h > 0 else 0
    t0 = int(rng.integers(0, T - length + 1))
    y0 = int(rng.integers(0, H - h + 1))
    x0 = int(rng.integers(0, W - w + 1))
    return t0, t0 + length, y0, y0 + h, x0, x0 + w


def da1_cutout(clip: VideoClip, cfg: AugmentConfig, rng: np.random.Generator,
               return_tube: bool = False):
    """Replace one random tube with zeros (cutout) or uniform noise (erase)."""
    t0, t1, y0, y1, x0, x1 = tube = sample_tube(clip.data.shape, cfg, rng)
    erase = rng.random() < 0.5
    data = clip.data.copy()
    region = data[:, t0:t1, y0:y1, x0:x1]
    if region.size:
        if erase:
            data[:, t0:t1, y0:y1, x0:x1] = rng.uniform(0.0, 1.0, size=region.shape)
        else:
            data[:, t0:t1, y0:y1, x0:x1] = 0.0
    out = VideoClip(data, clip.fps)
    return (out, tube) if return_tube else out


def upsample2x(x: np.ndarray, axis: int) -> np.ndarray:
    """Linear interpolation to twice the length at half-sample positions."""
    x = np.moveaxis(np.asarray(x), axis, 0)
    T = x.shape[0]
    pos = np.arange(2 * T) / 2.0
    i0 = np.floor(pos).astype(int)
    i1 = np.minimum(i0 + 1, T - 1)
    frac = (pos - i0).reshape((-1,) + (1,) * (x.ndim - 1))
    out = x[i0] * (1 - frac) + x[i1] * frac
    return np.moveaxis(out.astype(x.dtype, copy=False), 0, axis)


def downsample2x(x: np.ndarray, axis: int) -> np.ndarray:
    x = np.moveaxis(np.asarray(x), axis, 0)
    n = x.shape[0] // 2
    if n < 2:
        raise TooShortError(f"decimating {x.shape[0]} samples leaves {n} < 2")
    return np.moveaxis(x[: 2 * n: 2], 0, axis)


def da2_resample(clip: VideoClip, ppg: PulseSignal, hr: float, cfg: AugmentConfig):
    """Halve (hr above the upper threshold) or double (below the lower) the content rate.

    Frame rate metadata is kept; the returned label follows the content.
    """
    if clip.num_frames != len(ppg):
        raise ValueError(f"clip has {clip.num_frames} frames but ppg has {len(ppg)} samples")
    if hr > cfg.da2_upsample_threshold_bpm:
        return (
            VideoClip(upsample2x(clip.data, 1), clip.fps),
            PulseSignal(upsample2x(ppg.samples, 0), ppg.fps),
            hr / 2.0,
        )
    if hr < cfg.da2_downsample_threshold_bpm:
        return (
            VideoClip(downsample2x(clip.data, 1), clip.fps),
            PulseSignal(downsample2x(ppg.samples, 0), ppg.fps),
            hr * 2.0,
        )
    return clip, ppg, hr
