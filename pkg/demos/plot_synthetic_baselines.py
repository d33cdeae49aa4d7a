"""
Classical pulse extractors on a synthetic clip
==============================================

A 16x16 clip with a 84 bpm pulse on a rectangular skin patch, read out by
GREEN, CHROM and POS.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from autohr.baselines import EXTRACTORS
from autohr.signals import compute_psd, estimate_hr
from autohr.synth import SynthParams, gen_clip

params = SynthParams(hr_bpm=84.0, height=16, width=16, skin_region=(3, 3, 10, 10),
                     noise_sigma=0.01, seed=1)
clip, ppg, hr = gen_clip(params)
print("clip", clip.shape, "ground truth", hr, "bpm")

fig, (ax_t, ax_f) = plt.subplots(2, 1, figsize=(7, 5))
for name, extract in EXTRACTORS.items():
    sig = extract(clip)
    psd = compute_psd(sig)
    print(f"{name:>5}: {estimate_hr(sig):.0f} bpm")
    ax_t.plot(sig.samples[:90] / sig.samples.std(), label=name)
    ax_f.plot(psd.freqs_bpm, psd.power / psd.power.max(), label=name)

ax_t.set_xlabel("frame")
ax_f.set_xlabel("bpm")
ax_f.axvline(hr, color="k", ls="--", lw=0.8)
ax_t.legend()
fig.tight_layout()
fig.savefig("baselines.png")
