"""Synthetic face-like videos with an exactly known pulse.

A rectangular "skin" region carries the pulse waveform (green-dominant),
on top of a flat background. Optional Gaussian pixel noise, a slow
illumination drift on the skin, and a rigid circular translation of the
region are available.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image

from autohr.signals import HR_BAND, PulseSignal, VideoClip

log = logging.getLogger(__name__)

DRIFT_HZ = 0.05
MOTION_HZ = 0.2
MANIFEST_COLUMNS = ["id", "subject", "hr", "fps", "frames", "path"]


@dataclass
class SynthParams:
    hr_bpm: float = 72.0
    fps: float = 30.0
    num_frames: int = 300
    height: int = 32
    width: int = 32
    # (top, left, height, width)
    skin_region: tuple = (8, 8, 16, 16)
    pulse_amplitude: tuple = (0.005, 0.01, 0.005)
    base_color: tuple = (0.70, 0.50, 0.40)
    background: tuple = (0.20, 0.20, 0.25)
    noise_sigma: float = 0.0
    illumination_drift_amplitude: float = 0.0
    motion_amplitude: float = 0.0
    harmonic_ratio: float = 0.5
    seed: int = 0

    def __post_init__(self):
        lo, hi = HR_BAND
        if not lo <= self.hr_bpm <= hi:
            raise ValueError(f"hr_bpm {self.hr_bpm} outside [{lo}, {hi}]")
        if min(self.pulse_amplitude) < 0:
            raise ValueError("pulse amplitudes must be >= 0")
        top, left, h, w = self.skin_region
        if top < 0 or left < 0 or top + h > self.height or left + w > self.width or h < 1 or w < 1:
            raise ValueError(f"skin region {self.skin_region} not inside {self.height}x{self.width}")


def gen_ppg(params: SynthParams) -> PulseSignal:
    t = np.arange(params.num_frames) / params.fps
    f = params.hr_bpm / 60.0
    s = np.sin(2 * np.pi * f * t) + params.harmonic_ratio * np.sin(4 * np.pi * f * t)
    return PulseSignal(s, params.fps)


def motion_offsets(params: SynthParams) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(params.num_frames) / params.fps
    a = params.motion_amplitude
    dy = np.rint(a * np.sin(2 * np.pi * MOTION_HZ * t)).astype(int)
    dx = np.rint(a * np.cos(2 * np.pi * MOTION_HZ * t)).astype(int)
    return dy, dx


def render_clip(params: SynthParams) -> np.ndarray:
    """Unclamped (3, T, H, W) float array."""
    rng = np.random.default_rng(params.seed)
    T, H, W = params.num_frames, params.height, params.width
    s = gen_ppg(params).samples
    t = np.arange(T) / params.fps
    drift = params.illumination_drift_amplitude * np.sin(2 * np.pi * DRIFT_HZ * t)
    data = np.empty((3, T, H, W))
    data[:] = np.asarray(params.background)[:, None, None, None]
    top, left, h, w = params.skin_region
    dy, dx = motion_offsets(params)
    if (top + dy.min() < 0 or left + dx.min() < 0
            or top + h + dy.max() > H or left + w + dx.max() > W):
        raise ValueError("skin region leaves the frame under the requested motion")
    skin = (np.asarray(params.base_color)[:, None]
            + np.asarray(params.pulse_amplitude)[:, None] * s[None]
            + drift[None])
    for k in range(T):
        y, x = top + dy[k], left + dx[k]
        data[:, k, y:y + h, x:x + w] = skin[:, k, None, None]
    if params.noise_sigma > 0:
        data += rng.normal(0.0, params.noise_sigma, size=data.shape)
    return data


def gen_clip(params: SynthParams) -> tuple[VideoClip, PulseSignal, float]:
    raw = render_clip(params)
    frac = float(np.mean((raw < 0) | (raw > 1)))
    if frac > 0.01:
        log.warning("clamped %.2f%% of voxels to [0, 1]", 100 * frac)
    clip = VideoClip(np.clip(raw, 0.0, 1.0).astype(np.float32), params.fps)
    return clip, gen_ppg(params), float(params.hr_bpm)


def subject_params(template: SynthParams, subject: int) -> SynthParams:
    """Per-subject skin tone and region placement, fixed by the subject id."""
    rng = np.random.default_rng([template.seed, 7919, subject])
    base = np.clip(np.asarray(template.base_color) + rng.uniform(-0.08, 0.08, 3), 0.1, 0.9)
    top, left, h, w = template.skin_region
    slack_y = template.height - h - top
    slack_x = template.width - w - left
    dy = int(rng.integers(-min(top, 2), min(slack_y, 2) + 1))
    dx = int(rng.integers(-min(left, 2), min(slack_x, 2) + 1))
    return replace(template, base_color=tuple(float(v) for v in base),
                   skin_region=(top + dy, left + dx, h, w))


@dataclass
class VideoRecord:
    id: str
    subject: str
    hr: float
    fps: float
    clip: VideoClip
    ppg: PulseSignal
    path: str = ""


@dataclass
class SynthDataset:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def manifest_rows(self) -> list[dict]:
        return [
            {"id": r.id, "subject": r.subject, "hr": repr(float(r.hr)), "fps": repr(float(r.fps)),
             "frames": r.clip.num_frames, "path": r.path}
            for r in self.records
        ]


def gen_dataset(n: int, hr_range=(50.0, 150.0), subjects: int = 10, seed: int = 0,
                template: SynthParams | None = None, out_dir=None) -> SynthDataset:
    """``n`` clips with uniform HR, subjects assigned round-robin.

    With ``out_dir`` the clips are also written as PNG frame directories
    with ``meta.txt`` and ``ppg.txt``, plus ``manifest.csv`` at the root.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    template = template or SynthParams()
    rng = np.random.default_rng(seed)
    hrs = rng.uniform(hr_range[0], hr_range[1], size=n)
    ds = SynthDataset()
    for i in range(n):
        subj = i % subjects
        params = replace(subject_params(replace(template, seed=seed), subj),
                         hr_bpm=float(hrs[i]), seed=int(rng.integers(2**31)))
        clip, ppg, hr = gen_clip(params)
        vid = f"v{i:04d}"
        path = f"{vid}" if out_dir is not None else ""
        ds.records.append(VideoRecord(vid, f"s{subj:03d}", hr, params.fps, clip, ppg, path))
    if out_dir is not None:
        write_dataset(ds, out_dir)
    return ds


def write_dataset(ds: SynthDataset, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for r in ds.records:
        r.path = r.path or r.id
        write_clip(out / r.path, r.clip, r.ppg, hr=r.hr, subject=r.subject)
    with open(out / "manifest.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=MANIFEST_COLUMNS)
        w.writeheader()
        w.writerows(ds.manifest_rows())
    return out


def write_clip(directory, clip: VideoClip, ppg: PulseSignal | None, hr: float, subject) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    frames = np.rint(np.clip(clip.data, 0, 1) * 255).astype(np.uint8)
    for k in range(clip.num_frames):
        Image.fromarray(np.moveaxis(frames[:, k], 0, -1)).save(d / f"{k:06d}.png")
    (d / "meta.txt").write_text(f"fps={float(clip.fps)!r}\nhr={float(hr)!r}\nsubject={subject}\n")
    if ppg is not None:
        ppg.save(d / "ppg.txt")


def read_clip(directory) -> tuple[VideoClip, PulseSignal | None, dict]:
    d = Path(directory)
    meta = {}
    for line in (d / "meta.txt").read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    files = sorted(d.glob("*.png"))
    if not files:
        raise FileNotFoundError(f"no PNG frames in {d}")
    frames = np.stack([np.asarray(Image.open(f).convert("RGB")) for f in files])
    data = np.moveaxis(frames, -1, 0).astype(np.float32) / 255.0
    ppg = PulseSignal.load(d / "ppg.txt") if (d / "ppg.txt").exists() else None
    return VideoClip(data, float(meta["fps"])), ppg, meta


def load_dataset(root) -> SynthDataset:
    """Read any frame-directory dataset described by ``manifest.csv``."""
    root = Path(root)
    manifest = root / "manifest.csv"
    if not manifest.exists():
        raise FileNotFoundError(f"no manifest.csv in {root}")
    ds = SynthDataset()
    with open(manifest, newline="") as fh:
        for row in csv.DictReader(fh):
            clip, ppg, _ = read_clip(root / row["path"])
            if ppg is None:
                raise FileNotFoundError(f"{root / row['path']}: missing ppg.txt")
            ds.records.append(VideoRecord(
                row["id"], row["subject"], float(row["hr"]), float(row["fps"]),
                clip, ppg, row["path"]))
    return ds
