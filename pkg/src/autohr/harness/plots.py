"""Figures from evaluation outputs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from autohr.harness.tables import RESULTS, read_table  # noqa: E402
from autohr.signals import PulseSignal, compute_psd  # noqa: E402


def plot_results(results_csv, out_dir=None, max_psd: int = 6) -> list[Path]:
    """Scatter of predicted vs ground-truth HR, and PSDs of the stored predicted signals.

    Signals are looked up in the ``signals/`` directory next to the results file
    (``<prefix>signals/`` for ``<prefix>results.csv``).
    """
    results_csv = Path(results_csv)
    if not results_csv.exists():
        raise FileNotFoundError(f"results file not found: {results_csv}")
    out = Path(out_dir) if out_dir else results_csv.parent
    out.mkdir(parents=True, exist_ok=True)
    rows = [r for r in read_table(results_csv, RESULTS) if r["pred_hr"] is not None]
    prefix = results_csv.name[: -len("results.csv")] if results_csv.name.endswith("results.csv") else ""
    sig_dir = results_csv.parent / f"{prefix}signals"

    fig, ax = plt.subplots(figsize=(4, 4))
    gt = [r["gt_hr"] for r in rows]
    pred = [r["pred_hr"] for r in rows]
    ax.scatter(gt, pred, s=14)
    lo = min(gt + pred, default=40) - 5
    hi = max(gt + pred, default=180) + 5
    ax.plot([lo, hi], [lo, hi], "k--", lw=0.8)
    ax.set_xlabel("ground-truth HR (bpm)")
    ax.set_ylabel("predicted HR (bpm)")
    fig.tight_layout()
    scatter = out / f"{prefix}scatter.png"
    fig.savefig(scatter, dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 3.5))
    shown = 0
    for r in rows:
        path = sig_dir / f"{r['id']}.txt"
        if not path.exists():
            continue
        psd = compute_psd(PulseSignal.load(path))
        ax.plot(psd.freqs_bpm, psd.power / max(psd.power.max(), 1e-300), lw=1,
                label=f"{r['id']} (gt {r['gt_hr']:.0f})")
        shown += 1
        if shown >= max_psd:
            break
    if shown == 0:
        plt.close(fig)
        raise FileNotFoundError(f"no predicted signals in {sig_dir}")
    ax.set_xlabel("frequency (bpm)")
    ax.set_ylabel("normalized power")
    ax.legend(fontsize=7)
    fig.tight_layout()
    psd_path = out / f"{prefix}psd.png"
    fig.savefig(psd_path, dpi=120)
    plt.close(fig)
    return [scatter, psd_path]
