import math
from pathlib import Path

import numpy as np
import pytest
import torch

from autohr.baselines import EXTRACTORS, chrom_rppg, green_rppg, pos_rppg, region_means
from autohr.errors import DegenerateVarianceError, NoPeakError, ShapeError
from autohr.losses import neg_pearson
from autohr.signals import PulseSignal, VideoClip, compute_psd, estimate_hr
from autohr.synth import (
    SynthParams,
    gen_clip,
    gen_dataset,
    gen_ppg,
    load_dataset,
    motion_offsets,
    render_clip,
)


def naive_peak_bpm(samples, fps):
    """Brute-force DFT over 40..180 bpm; lowest bin wins ties."""
    s = [float(v) for v in samples]
    m = sum(s) / len(s)
    best, best_p = None, -1.0
    for bpm in range(40, 181):
        re = im = 0.0
        for t, v in enumerate(s):
            ang = 2 * math.pi * bpm / 60.0 * t / fps
            re += (v - m) * math.cos(ang)
            im += (v - m) * math.sin(ang)
        p = re * re + im * im
        if p > best_p:
            best, best_p = bpm, p
    return float(best)


def green_oracle(clip, region):
    top, left, h, w = region
    out = []
    for t in range(clip.num_frames):
        acc = 0.0
        for y in range(top, top + h):
            for x in range(left, left + w):
                acc += float(clip.data[1, t, y, x])
        out.append(acc / (h * w))
    return out


def test_period_is_30_samples_at_60_bpm():
    s = gen_ppg(SynthParams(hr_bpm=60.0)).samples
    assert np.allclose(s[30:], s[:-30], atol=1e-12)
    assert not np.allclose(s[15:], s[:-15])


def test_pure_sinusoid_single_peak():
    psd = compute_psd(gen_ppg(SynthParams(hr_bpm=84.0, harmonic_ratio=0.0)))
    k = int(np.argmax(psd.power))
    assert psd.freqs_bpm[k] == 84
    # 10 s window: main lobe spans +-6 bpm; nothing else beyond the sidelobes
    far = np.abs(psd.freqs_bpm - 84) > 12
    assert psd.power[far].max() < 0.05 * psd.power[k]


@pytest.mark.parametrize("hr", [45.0, 72.0, 150.0])
def test_gen_ppg_readout(hr):
    sig = gen_ppg(SynthParams(hr_bpm=hr))
    assert abs(estimate_hr(sig) - hr) <= 1.0
    assert abs(naive_peak_bpm(sig.samples, sig.fps) - hr) <= 1.0


def test_green_oracle_recovers_hr():
    p = SynthParams(hr_bpm=72.0, num_frames=300, height=10, width=10, skin_region=(2, 2, 6, 6),
                    pulse_amplitude=(0.002, 0.01, 0.004))
    clip, _, hr = gen_clip(p)
    trace = green_oracle(clip, p.skin_region)
    assert abs(naive_peak_bpm(trace, clip.fps) - hr) <= 1.0
    assert np.allclose(green_rppg(clip, p.skin_region).samples,
                       np.asarray(trace) - np.mean(trace), atol=1e-9)
    assert abs(estimate_hr(green_rppg(clip)) - hr) <= 1.0


def test_zero_amplitude_has_no_peak():
    clip, _, _ = gen_clip(SynthParams(pulse_amplitude=(0.0, 0.0, 0.0)))
    g = green_rppg(clip)
    assert np.all(g.samples == 0)
    with pytest.raises(NoPeakError):
        estimate_hr(g)


def test_same_seed_same_clip():
    p = SynthParams(noise_sigma=0.02, motion_amplitude=1.5, illumination_drift_amplitude=0.02,
                    seed=4)
    a, _, _ = gen_clip(p)
    b, _, _ = gen_clip(p)
    assert np.array_equal(a.data, b.data)
    c, _, _ = gen_clip(SynthParams(noise_sigma=0.02, seed=5))
    assert not np.array_equal(a.data, c.data)


def test_region_leaving_frame_is_error():
    p = SynthParams(height=20, width=20, skin_region=(1, 1, 16, 16), motion_amplitude=3.0)
    with pytest.raises(ValueError):
        gen_clip(p)


def test_invalid_params():
    with pytest.raises(ValueError):
        SynthParams(hr_bpm=200)
    with pytest.raises(ValueError):
        SynthParams(pulse_amplitude=(-0.1, 0.01, 0.0))
    with pytest.raises(ValueError):
        SynthParams(skin_region=(20, 20, 16, 16))


def test_motion_path_is_circular():
    dy, dx = motion_offsets(SynthParams(motion_amplitude=2.0))
    # integer-pixel path: each axis rounded, so radius is within sqrt(0.5) of the amplitude
    assert np.all(np.abs(np.hypot(dy, dx) - 2.0) <= math.sqrt(0.5) + 1e-12)
    assert dy.max() == 2 and dy.min() == -2 and dx.max() == 2 and dx.min() == -2


def test_ground_truth_consistency():
    clip, ppg, _ = gen_clip(SynthParams(hr_bpm=96.0))
    g = green_rppg(clip)
    assert neg_pearson(torch.as_tensor(ppg.samples), torch.as_tensor(g.samples)).item() <= 0.05


def test_clamp_fraction_bounded():
    p = SynthParams(noise_sigma=0.05, illumination_drift_amplitude=0.05, motion_amplitude=1.0)
    raw = render_clip(p)
    assert ((raw < 0) | (raw > 1)).mean() <= 0.01
    clip, _, _ = gen_clip(p)
    assert clip.data.min() >= 0 and clip.data.max() <= 1


def test_dataset_rows_and_range():
    ds = gen_dataset(64, (50, 150), subjects=10, seed=0,
                     template=SynthParams(height=8, width=8, skin_region=(2, 2, 4, 4),
                                          num_frames=40))
    rows = ds.manifest_rows()
    assert len(rows) == 64
    assert all(50 <= float(r["hr"]) <= 150 for r in rows)
    assert [r["subject"] for r in rows[:11]] == [f"s{i % 10:03d}" for i in range(11)]


def test_dataset_files_deterministic(tmp_path):
    tpl = SynthParams(height=8, width=8, skin_region=(2, 2, 4, 4), num_frames=12, noise_sigma=0.01)
    gen_dataset(4, subjects=2, seed=3, template=tpl, out_dir=tmp_path / "a")
    gen_dataset(4, subjects=2, seed=3, template=tpl, out_dir=tmp_path / "b")
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert files_a == files_b and Path("manifest.csv") in files_a
    for f in files_a:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_dataset_round_trip(tmp_path):
    tpl = SynthParams(height=8, width=8, skin_region=(2, 2, 4, 4), num_frames=20)
    ds = gen_dataset(3, subjects=2, seed=1, template=tpl, out_dir=tmp_path)
    back = load_dataset(tmp_path)
    for a, b in zip(ds.records, back.records):
        assert (a.id, a.subject, a.hr, a.fps) == (b.id, b.subject, b.hr, b.fps)
        assert np.abs(a.clip.data - b.clip.data).max() <= 0.5 / 255 + 1e-6
        assert np.array_equal(a.ppg.samples, b.ppg.samples)


def test_load_dataset_missing_manifest(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path)


@pytest.mark.parametrize("name", sorted(EXTRACTORS))
@pytest.mark.parametrize("hr", [55.0, 72.0, 130.0])
def test_extractors_recover_clean_hr(name, hr):
    clip, _, _ = gen_clip(SynthParams(hr_bpm=hr))
    assert abs(estimate_hr(EXTRACTORS[name](clip)) - hr) <= 1.0


def test_static_clip_green_zero_and_degenerate_for_others():
    clip = VideoClip(np.full((3, 60, 4, 4), 0.5), 30.0)
    assert np.all(green_rppg(clip).samples == 0)
    with pytest.raises(DegenerateVarianceError):
        chrom_rppg(clip)
    with pytest.raises(DegenerateVarianceError):
        pos_rppg(clip)


def test_drift_only_no_72_lock():
    p = SynthParams(pulse_amplitude=(0.0, 0.0, 0.0), illumination_drift_amplitude=0.05,
                    noise_sigma=0.01, seed=8)
    clip, _, _ = gen_clip(p)
    est = estimate_hr(pos_rppg(clip, p.skin_region))
    assert abs(est - 72.0) > 2.0


def test_chrom_matches_hand_formula():
    rng = np.random.default_rng(0)
    data = 0.5 + 0.05 * rng.normal(size=(3, 50, 2, 2))
    clip = VideoClip(data, 30.0)
    rgb = data.mean(axis=(2, 3))
    n = rgb / rgb.mean(axis=1, keepdims=True)
    x = 3 * n[0] - 2 * n[1]
    y = 1.5 * n[0] + n[1] - 1.5 * n[2]
    s = x - x.std() / y.std() * y
    assert np.allclose(chrom_rppg(clip).samples, s - s.mean(), atol=1e-12)


def test_region_outside_frame():
    clip = VideoClip(np.ones((3, 10, 4, 4)), 30.0)
    with pytest.raises(ShapeError):
        region_means(clip, (2, 2, 4, 4))


def test_pos_window_overlap_add_length():
    clip, _, _ = gen_clip(SynthParams(num_frames=30))
    assert len(pos_rppg(clip)) == 30
    assert isinstance(pos_rppg(clip), PulseSignal)
