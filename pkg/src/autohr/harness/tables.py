"""Typed CSV tables written and read by the harness.

Floats are written with ``repr`` so a write/read cycle is exact; ``None``
is written as an empty cell.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

TRAIN_LOG = {"epoch": int, "L_time": float, "L_fre": float, "L_overall": float}
RESULTS = {"id": str, "gt_hr": float, "pred_hr": float, "error": float, "status": str}
SEARCH_TRACE = {"epoch": int, "arch_updated": int, "train_loss": float, "val_loss": float,
                "entropy": float}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_table(path, schema: dict, rows: list[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(schema))
        for row in rows:
            w.writerow([_fmt(row.get(col)) for col in schema])
    return path


def read_table(path, schema: dict) -> list[dict]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(schema) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            out.append({c: (None if row[c] == "" and t is not str else t(row[c]))
                        for c, t in schema.items()})
    return out
