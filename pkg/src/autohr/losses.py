"""Time-domain negative Pearson loss, frequency-domain cross-entropy, and their mix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from autohr.errors import DegenerateVarianceError, InvalidLabelError
from autohr.signals import HR_BAND, HR_STEP, check_band, freq_grid, periodogram


@dataclass
class LossConfig:
    lambda_time: float = 0.2
    band_bpm: tuple = HR_BAND
    step_bpm: float = HR_STEP

    def __post_init__(self):
        if self.lambda_time < 0:
            raise ValueError(f"lambda_time must be >= 0, got {self.lambda_time}")
        freq_grid(self.band_bpm, self.step_bpm)


def _as_batch(x):
    x = torch.as_tensor(x)
    return x[None] if x.dim() == 1 else x


def _is_constant(x: torch.Tensor) -> torch.Tensor:
    return (x == x[..., :1]).all(dim=-1)


def neg_pearson(x, y) -> torch.Tensor:
    """``1 - r(x, y)`` averaged over the batch; inputs are (T,) or (B, T)."""
    x, y = _as_batch(x), _as_batch(y)
    if x.shape != y.shape or x.shape[-1] < 2:
        raise ValueError(f"need equal shapes with T >= 2, got {tuple(x.shape)} and {tuple(y.shape)}")
    if _is_constant(x).any() or _is_constant(y).any():
        raise DegenerateVarianceError("zero-variance signal in negative Pearson loss")
    xc = x - x.mean(dim=-1, keepdim=True)
    yc = y - y.mean(dim=-1, keepdim=True)
    r = (xc * yc).sum(-1) / torch.sqrt((xc**2).sum(-1) * (yc**2).sum(-1))
    return (1 - r).mean()


def hr_class_index(hr_bpm, cfg: LossConfig) -> np.ndarray:
    hr = np.atleast_1d(np.asarray(hr_bpm, dtype=np.float64))
    low, high = cfg.band_bpm
    if np.any(hr < low) or np.any(hr > high) or not np.all(np.isfinite(hr)):
        raise InvalidLabelError(f"heart rate {hr.tolist()} outside band [{low}, {high}] bpm")
    idx = np.floor((hr - low) / cfg.step_bpm + 0.5).astype(np.int64)
    return np.minimum(idx, len(freq_grid(cfg.band_bpm, cfg.step_bpm)) - 1)


def psd_logits(x, fps: float, cfg: LossConfig) -> torch.Tensor:
    check_band(cfg.band_bpm, fps)
    return periodogram(_as_batch(x), fps, freq_grid(cfg.band_bpm, cfg.step_bpm))


def freq_ce_loss(x, hr_gt, fps: float, cfg: LossConfig | None = None) -> torch.Tensor:
    """Cross-entropy of the band-limited periodogram (raw logits) against the HR class."""
    cfg = cfg or LossConfig()
    logits = psd_logits(x, fps, cfg)
    target = torch.as_tensor(hr_class_index(hr_gt, cfg), device=logits.device)
    if target.numel() == 1 and logits.shape[0] > 1:
        target = target.expand(logits.shape[0])
    return F.cross_entropy(logits, target)


def loss_terms(x, y, hr_gt, fps: float, cfg: LossConfig | None = None) -> dict:
    cfg = cfg or LossConfig()
    l_time = neg_pearson(x, y)
    l_fre = freq_ce_loss(x, hr_gt, fps, cfg)
    return {"time": l_time, "fre": l_fre, "overall": cfg.lambda_time * l_time + l_fre}


def overall_loss(x, y, hr_gt, fps: float, cfg: LossConfig | None = None) -> torch.Tensor:
    return loss_terms(x, y, hr_gt, fps, cfg)["overall"]

