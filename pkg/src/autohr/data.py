"""Training-sample plumbing shared by the search and training loops."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from autohr.augment import AugmentConfig, da1_cutout, da2_resample, sample_rng
from autohr.errors import TooShortError
from autohr.signals import PulseSignal, VideoClip


@dataclass
class Sample:
    clip: np.ndarray  # (3, L, H, W)
    ppg: np.ndarray  # (L,)
    hr: float
    fps: float


def random_window(clip: VideoClip, ppg: PulseSignal, hr: float, length: int,
                  rng: np.random.Generator) -> Sample:
    T = clip.num_frames
    if T < length:
        raise TooShortError(f"clip has {T} frames, window needs {length}")
    start = int(rng.integers(0, T - length + 1))
    return Sample(clip.data[:, start:start + length], ppg.samples[start:start + length], hr, clip.fps)


def epoch_samples(records, length: int, seed: int, epoch: int,
                  augment: AugmentConfig | None = None, use_da1=False, use_da2=False,
                  stream: int = 0) -> list[Sample]:
    """One random window per record, plus DA2 extras; DA1 applied with probability 1/2.

    Every draw comes from a stream keyed on (seed, stream, epoch, record index)
    so the result does not depend on iteration order.
    """
    augment = augment or AugmentConfig(seed=seed)
    out = []
    for i, r in enumerate(records):
        rng = sample_rng(seed, stream, epoch, i)
        variants = [(r.clip, r.ppg, r.hr)]
        if use_da2:
            c2, p2, h2 = da2_resample(r.clip, r.ppg, r.hr, augment)
            if h2 != r.hr and c2.num_frames >= length:
                variants.append((c2, p2, h2))
        for clip, ppg, hr in variants:
            s = random_window(clip, ppg, hr, length, rng)
            if use_da1 and rng.random() < 0.5:
                s.clip = da1_cutout(VideoClip(s.clip, s.fps), augment, rng).data
            out.append(s)
    return out


def batches(samples: list[Sample], batch_size: int, rng: np.random.Generator):
    order = rng.permutation(len(samples))
    for k in range(0, len(order), batch_size):
        yield collate([samples[j] for j in order[k:k + batch_size]])


def collate(samples: list[Sample], dtype=torch.float32):
    fps = {s.fps for s in samples}
    if len(fps) != 1:
        raise ValueError(f"mixed frame rates in one batch: {sorted(fps)}")
    x = torch.as_tensor(np.stack([s.clip for s in samples]), dtype=dtype)
    y = torch.as_tensor(np.stack([s.ppg for s in samples]), dtype=dtype)
    hr = np.array([s.hr for s in samples])
    return x, y, hr, fps.pop()
