import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autohr.errors import InvalidBandError, NoPeakError
from autohr.signals import (
    MetricsReport,
    PulseSignal,
    clip_average_hr,
    compute_metrics,
    compute_psd,
    estimate_hr,
    freq_grid,
    read_metrics_csv,
    write_metrics_csv,
)


def naive_psd(samples, fps, freqs_bpm):
    """Double-loop DFT at each grid frequency on the zero-meaned series."""
    s = [float(v) for v in samples]
    mean = sum(s) / len(s)
    out = []
    for f in freqs_bpm:
        re = im = 0.0
        for t, v in enumerate(s):
            ang = 2 * math.pi * (f / 60.0) * t / fps
            re += (v - mean) * math.cos(ang)
            im -= (v - mean) * math.sin(ang)
        out.append((re * re + im * im) / len(s))
    return np.array(out)


def sine(freq_hz, fps=30.0, n=300, amp=1.0):
    t = np.arange(n) / fps
    return PulseSignal(amp * np.sin(2 * np.pi * freq_hz * t), fps)


def test_grid_default_has_141_points():
    g = freq_grid()
    assert len(g) == 141 and g[0] == 40 and g[-1] == 180


def test_psd_peak_at_72_bpm():
    s = sine(1.2)
    psd = compute_psd(s)
    oracle = naive_psd(s.samples, 30.0, psd.freqs_bpm)
    assert psd.freqs_bpm[np.argmax(oracle)] == 72
    assert psd.freqs_bpm[np.argmax(psd.power)] == 72


def test_psd_constant_is_zero():
    psd = compute_psd(PulseSignal(np.full(200, 0.3), 30.0))
    assert np.all(psd.power == 0)


def test_psd_quadratic_scaling():
    a = compute_psd(sine(1.2))
    b = compute_psd(sine(1.2, amp=2.0))
    np.testing.assert_allclose(b.power, 4 * a.power, rtol=1e-12)
    assert np.argmax(a.power) == np.argmax(b.power)


@pytest.mark.parametrize("band", [(40, 1000), (0, 100), (100, 90)])
def test_psd_invalid_band(band):
    with pytest.raises(InvalidBandError):
        compute_psd(sine(1.2), band)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 512), st.integers(0, 2**31 - 1))
def test_psd_matches_naive_dft(n, seed):
    rng = np.random.default_rng(seed)
    s = PulseSignal(rng.normal(size=n), 30.0)
    psd = compute_psd(s, (40, 180), 7.0)
    oracle = naive_psd(s.samples, 30.0, psd.freqs_bpm)
    np.testing.assert_allclose(psd.power, oracle, rtol=1e-9, atol=1e-12 * oracle.max())


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5).filter(lambda a: abs(a) > 1e-3), st.floats(-10, 10), st.integers(0, 1000))
def test_argmax_affine_invariant(a, b, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=128)
    p1 = compute_psd(PulseSignal(x, 30.0)).power
    p2 = compute_psd(PulseSignal(a * x + b, 30.0)).power
    np.testing.assert_allclose(p2, a * a * p1, rtol=1e-8, atol=1e-10 * p1.max())
    assert np.argmax(p1) == np.argmax(p2)


def test_estimate_hr_120():
    assert estimate_hr(sine(2.0)) == 120


def test_estimate_hr_flat_raises():
    with pytest.raises(NoPeakError):
        estimate_hr(PulseSignal(np.ones(300), 30.0))


def test_estimate_hr_noisy():
    rng = np.random.default_rng(0)
    s = sine(1.2)
    noisy = PulseSignal(s.samples + 0.1 * rng.uniform(-1, 1, s.samples.size), 30.0)
    oracle = naive_psd(noisy.samples, 30.0, freq_grid())
    assert abs(freq_grid()[np.argmax(oracle)] - 72) <= 1
    assert abs(estimate_hr(noisy) - 72) <= 1


def test_estimate_hr_tie_goes_low(monkeypatch):
    import autohr.signals as sig

    freqs = freq_grid()
    power = np.zeros_like(freqs)
    power[[20, 60]] = 3.0
    monkeypatch.setattr(sig, "compute_psd", lambda *a, **k: sig.PSDVector(freqs, power))
    assert sig.estimate_hr(sine(1.0)) == 60


def test_metrics_identity():
    m = compute_metrics([60, 80, 100], [60, 80, 100])
    assert (m.mae, m.rmse, m.sd, m.pearson_r) == (0, 0, 0, 1)


def test_metrics_hand_values():
    m = compute_metrics([72, 80, 90], [70, 84, 88])
    # errors 2, -4, 2
    assert m.mae == pytest.approx(8 / 3, abs=1e-12)
    assert m.rmse == pytest.approx(math.sqrt(8), abs=1e-12)
    assert m.sd == pytest.approx(math.sqrt(8), abs=1e-12)


def test_metrics_undefined_r():
    m = compute_metrics([70, 70], [60, 80])
    assert m.pearson_r is None
    assert m.mae == 10


def test_metrics_length_mismatch():
    with pytest.raises(ValueError):
        compute_metrics([1, 2], [1])
    with pytest.raises(ValueError):
        compute_metrics([], [])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(40, 180), min_size=2, max_size=30), st.floats(-20, 20))
def test_constant_offset(gts, c):
    g = np.array(gts)
    if np.ptp(g) < 1e-3:
        return
    m = compute_metrics(g + c, g)
    assert m.pearson_r == pytest.approx(1.0, abs=1e-9)
    assert m.mae == pytest.approx(abs(c), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(40, 180), st.floats(40, 180)), min_size=1, max_size=40))
def test_mae_le_rmse(pairs):
    p, g = zip(*pairs)
    m = compute_metrics(p, g)
    assert m.mae <= m.rmse + 1e-9
    assert m.sd >= 0


@pytest.mark.parametrize("hrs,expected", [([72, 74, 76], 74), ([60], 60), ([50, 100, 90], 80)])
def test_clip_average(hrs, expected):
    assert clip_average_hr(hrs) == expected


def test_clip_average_empty():
    with pytest.raises(ValueError):
        clip_average_hr([])


def test_pulse_signal_roundtrip(tmp_path):
    s = PulseSignal(np.random.default_rng(1).normal(size=50), 29.97)
    s.save(tmp_path / "s.txt")
    assert (tmp_path / "s.txt").read_text().startswith("fps=29.97\n")
    back = PulseSignal.load(tmp_path / "s.txt")
    assert back.fps == s.fps
    np.testing.assert_array_equal(back.samples, s.samples)


def test_metrics_csv_roundtrip(tmp_path):
    rows = {
        "fold0": compute_metrics([72.1, 80, 90], [70, 84, 88.3]),
        "fold1": MetricsReport(0.0, 10.0, 10.0, None),
    }
    write_metrics_csv(tmp_path / "m.csv", rows)
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "split,sd,mae,rmse,r"
    assert read_metrics_csv(tmp_path / "m.csv") == rows
