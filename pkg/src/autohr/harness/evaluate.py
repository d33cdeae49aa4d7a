"""Video-level evaluation: uniform fixed-length clips, per-clip HR, averaged per video."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from autohr.backbone import TEMPORAL_FACTOR, forward, load_checkpoint
from autohr.baselines import EXTRACTORS
from autohr.errors import DegenerateVarianceError, NoPeakError
from autohr.signals import (
    MetricsReport,
    PulseSignal,
    VideoClip,
    clip_average_hr,
    compute_metrics,
    estimate_hr,
    write_metrics_csv,
)
from autohr.harness.tables import RESULTS, write_table

log = logging.getLogger(__name__)


def clip_frames(fps: float, seconds: float, multiple: int = TEMPORAL_FACTOR) -> int:
    n = int(round(seconds * fps))
    return n - n % multiple


def split_clips(clip: VideoClip, length: int) -> list[VideoClip]:
    """Uniform consecutive clips of ``length`` frames; a trailing remainder is dropped."""
    k = clip.num_frames // length
    return [VideoClip(clip.data[:, i * length:(i + 1) * length], clip.fps) for i in range(k)]


@dataclass
class EvalResult:
    metrics: MetricsReport | None
    rows: list = field(default_factory=list)
    signals: dict = field(default_factory=dict)


def evaluate_with(extract: Callable[[VideoClip], PulseSignal], records,
                  clip_seconds: float = 10.0) -> EvalResult:
    """Run ``extract`` on every clip of every video and average the clip HRs per video."""
    rows, signals, preds, gts = [], {}, [], []
    for r in records:
        length = clip_frames(r.fps, clip_seconds)
        clips = split_clips(r.clip, length) if length > 0 else []
        if not clips:
            log.warning("%s: %d frames is shorter than one %.1f s clip; skipped",
                        r.id, r.clip.num_frames, clip_seconds)
            rows.append({"id": r.id, "gt_hr": r.hr, "pred_hr": None, "error": None,
                         "status": "skipped: too short"})
            continue
        hrs, parts = [], []
        for c in clips:
            sig = extract(c)
            parts.append(sig.samples)
            try:
                hrs.append(estimate_hr(sig))
            except NoPeakError:
                log.warning("%s: flat prediction on one clip", r.id)
        signals[r.id] = PulseSignal(np.concatenate(parts), r.fps)
        if not hrs:
            rows.append({"id": r.id, "gt_hr": r.hr, "pred_hr": None, "error": None,
                         "status": "no peak"})
            continue
        pred = clip_average_hr(hrs)
        preds.append(pred)
        gts.append(r.hr)
        rows.append({"id": r.id, "gt_hr": r.hr, "pred_hr": pred, "error": pred - r.hr,
                     "status": "ok"})
    metrics = compute_metrics(preds, gts) if preds else None
    return EvalResult(metrics, rows, signals)


def evaluate(net_or_checkpoint, records, clip_seconds: float = 10.0) -> EvalResult:
    if isinstance(net_or_checkpoint, (str, Path)):
        net, _, _ = load_checkpoint(net_or_checkpoint)
    else:
        net = net_or_checkpoint
    net.eval()
    return evaluate_with(lambda c: forward(net, c), records, clip_seconds)


def baseline_extractor(name: str):
    fn = EXTRACTORS[name]

    def extract(clip):
        try:
            return fn(clip)
        except DegenerateVarianceError:
            return PulseSignal(np.zeros(clip.num_frames), clip.fps)
    return extract


def write_outputs(result: EvalResult, out_dir, split: str = "test", prefix: str = "") -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results_path = write_table(out / f"{prefix}results.csv", RESULTS, result.rows)
    if result.metrics is not None:
        write_metrics_csv(out / f"{prefix}metrics.csv", {split: result.metrics})
    sig_dir = out / f"{prefix}signals"
    sig_dir.mkdir(exist_ok=True)
    for vid, sig in result.signals.items():
        sig.save(sig_dir / f"{vid}.txt")
    return results_path
