"""One function per CLI mode; each takes an ExperimentConfig."""
from __future__ import annotations

import logging
from pathlib import Path

from autohr.backbone import load_checkpoint, save_checkpoint
from autohr.harness.config import ExperimentConfig, write_config_file
from autohr.harness.evaluate import (
    baseline_extractor,
    evaluate,
    evaluate_with,
    write_outputs,
)
from autohr.harness.folds import make_folds, split_records
from autohr.harness.plots import plot_results
from autohr.harness.tables import SEARCH_TRACE, write_table
from autohr.harness.train import latest_checkpoint, train
from autohr.nas.genotype import derive_architecture, genotype_to_text
from autohr.nas.search import search
from autohr.signals import write_metrics_csv
from autohr.synth import SynthParams, gen_dataset, load_dataset

log = logging.getLogger(__name__)


def synth_template(config: ExperimentConfig) -> SynthParams:
    """Skin rectangle covering the central 60% of the frame."""
    top = round(0.2 * config.height)
    left = round(0.2 * config.width)
    return SynthParams(
        fps=config.fps, num_frames=config.frames, height=config.height, width=config.width,
        skin_region=(top, left, config.height - 2 * top, config.width - 2 * left),
        noise_sigma=config.noise,
    )


def _require_dataset(path: str, flag: str = "dataset"):
    if not path:
        raise ValueError(f"--{flag} is required")
    return load_dataset(path).records


def train_test_records(config: ExperimentConfig):
    """Fold ``config.fold`` of ``dataset``, or all of ``dataset`` vs ``test_dataset``."""
    records = _require_dataset(config.dataset)
    if config.test_dataset:
        return records, _require_dataset(config.test_dataset, "test_dataset")
    plan = make_folds([r.subject for r in records], config.folds, config.seed)
    return split_records(records, plan[config.fold])


def run_synth(config: ExperimentConfig) -> Path:
    gen_dataset(config.n, (config.hr_low, config.hr_high), config.subjects, config.seed,
                synth_template(config), out_dir=config.out)
    return Path(config.out) / "manifest.csv"


def run_search(config: ExperimentConfig) -> Path:
    train_recs, _ = train_test_records(config)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    write_config_file(config, out / "config.txt")

    def on_epoch(epoch, net, row):
        cells = [derive_architecture(a) for a in net.all_arch_params()]
        save_checkpoint(out / "checkpoints" / f"epoch_{epoch:03d}", net, genotype=cells,
                        meta={"epoch": epoch, "seed": config.seed})

    result = search(train_recs, config.search_config(), on_epoch=on_epoch)
    write_table(out / "search_trace.csv", SEARCH_TRACE, result.trace)
    path = out / "genotype.txt"
    path.write_text(genotype_to_text(result.cells))
    return path


def run_derive(config: ExperimentConfig) -> Path:
    """Re-derive the genotype from a stored search checkpoint's logits."""
    ckpt = config.checkpoint or str(latest_checkpoint(config.out))
    net, _, _ = load_checkpoint(ckpt)
    if not net.config.supernet:
        raise ValueError(f"{ckpt} is not a search checkpoint")
    cells = [derive_architecture(a) for a in net.all_arch_params()]
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "genotype.txt"
    path.write_text(genotype_to_text(cells))
    return path


def run_train(config: ExperimentConfig) -> Path:
    train_recs, _ = train_test_records(config)
    Path(config.out).mkdir(parents=True, exist_ok=True)
    write_config_file(config, Path(config.out) / "config.txt")
    return train(config, train_recs).checkpoint


def run_eval(config: ExperimentConfig) -> Path:
    ckpt = config.checkpoint or str(latest_checkpoint(config.out))
    if not Path(ckpt).is_dir():
        raise FileNotFoundError(f"checkpoint not found: {ckpt}")
    _, test_recs = train_test_records(config)
    result = evaluate(ckpt, test_recs, config.eval_clip_seconds)
    if result.metrics is None:
        log.warning("no video produced a prediction")
    return write_outputs(result, config.out)


def run_baseline(config: ExperimentConfig) -> Path:
    """GREEN, CHROM and POS on the test split; one metrics row per method."""
    _, test_recs = train_test_records(config)
    reports = {}
    for name in ("green", "chrom", "pos"):
        result = evaluate_with(baseline_extractor(name), test_recs, config.eval_clip_seconds)
        write_outputs(result, config.out, split=name, prefix=f"{name}_")
        if result.metrics is not None:
            reports[name] = result.metrics
    return write_metrics_csv(Path(config.out) / "baseline_metrics.csv", reports)


def run_plot(config: ExperimentConfig) -> list[Path]:
    results = config.results or str(Path(config.out) / "results.csv")
    return plot_results(results)


RUNNERS = {
    "synth": run_synth,
    "search": run_search,
    "derive": run_derive,
    "train": run_train,
    "eval": run_eval,
    "baseline": run_baseline,
    "plot": run_plot,
}
