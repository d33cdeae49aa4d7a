"""Classical rPPG extractors: GREEN, CHROM and POS.

Each takes a clip and an optional ``(top, left, height, width)`` region and
returns a zero-mean pulse trace at the clip's frame rate.
"""
from __future__ import annotations

import math

import numpy as np

from autohr.errors import DegenerateVarianceError, ShapeError
from autohr.signals import PulseSignal, VideoClip

POS_WINDOW_SECONDS = 1.6
CHROM_X = np.array([3.0, -2.0, 0.0])
CHROM_Y = np.array([1.5, 1.0, -1.5])
POS_PROJECTION = np.array([[0.0, 1.0, -1.0], [-2.0, 1.0, 1.0]])


def region_means(clip: VideoClip, region=None) -> np.ndarray:
    """Per-frame spatial mean of each channel: (C, T)."""
    data = clip.data
    if region is not None:
        top, left, h, w = region
        H, W = data.shape[2:]
        if top < 0 or left < 0 or h < 1 or w < 1 or top + h > H or left + w > W:
            raise ShapeError(f"region {region} not inside {H}x{W} frame")
        data = data[:, :, top:top + h, left:left + w]
    return data.astype(np.float64).mean(axis=(2, 3))


def _rgb_means(clip, region):
    rgb = region_means(clip, region)
    if rgb.shape[0] != 3:
        raise ShapeError(f"need an RGB clip, got {rgb.shape[0]} channels")
    if np.any(np.all(rgb == rgb[:, :1], axis=1)):
        raise DegenerateVarianceError("a color channel has zero temporal variance")
    if np.any(rgb.mean(axis=1) == 0):
        raise DegenerateVarianceError("a color channel has zero mean")
    return rgb


def green_rppg(clip: VideoClip, region=None) -> PulseSignal:
    g = region_means(clip, region)[1]
    if np.all(g == g[0]):
        return PulseSignal(np.zeros_like(g), clip.fps)
    return PulseSignal(g - g.mean(), clip.fps)


def chrom_rppg(clip: VideoClip, region=None) -> PulseSignal:
    rgb = _rgb_means(clip, region)
    norm = rgb / rgb.mean(axis=1, keepdims=True)
    x = CHROM_X @ norm
    y = CHROM_Y @ norm
    sx, sy = x.std(), y.std()
    if sy == 0:
        raise DegenerateVarianceError("CHROM Y component has zero variance")
    s = x - (sx / sy) * y
    return PulseSignal(s - s.mean(), clip.fps)


def pos_rppg(clip: VideoClip, region=None, window_seconds: float = POS_WINDOW_SECONDS) -> PulseSignal:
    rgb = _rgb_means(clip, region)
    T = rgb.shape[1]
    win = min(T, int(math.ceil(window_seconds * clip.fps)))
    out = np.zeros(T)
    for start in range(0, T - win + 1):
        c = rgb[:, start:start + win]
        cn = c / c.mean(axis=1, keepdims=True)
        s = POS_PROJECTION @ cn
        s1, s2 = s
        sd2 = s2.std()
        h = s1 + (s1.std() / sd2) * s2 if sd2 > 0 else s1
        out[start:start + win] += h - h.mean()
    if np.all(out == out[0]):
        raise DegenerateVarianceError("POS projection is constant over every window")
    return PulseSignal(out - out.mean(), clip.fps)


EXTRACTORS = {"green": green_rppg, "chrom": chrom_rppg, "pos": pos_rppg}
