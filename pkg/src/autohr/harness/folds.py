"""Subject-independent k-fold splits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Fold:
    train: tuple
    test: tuple


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple

    def __len__(self):
        return len(self.folds)

    def __getitem__(self, k) -> Fold:
        return self.folds[k]


def unique_subjects(subjects) -> list:
    """Distinct subjects in order of first appearance."""
    seen = {}
    for s in subjects:
        seen.setdefault(s, None)
    return list(seen)


def make_folds(subjects, k: int, seed: int) -> FoldPlan:
    """Shuffle the distinct subjects with ``seed`` and cut them into ``k`` near-equal groups.

    ``subjects`` is any iterable of subject ids (e.g. one per manifest row).
    Order of first appearance, not the id values, fixes the shuffle input, so
    renaming subjects does not change which rows end up together.
    """
    subs = unique_subjects(subjects)
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if len(subs) < k:
        raise ValueError(f"{len(subs)} distinct subjects cannot fill {k} folds")
    order = np.random.default_rng(seed).permutation(len(subs))
    groups = np.array_split(order, k)
    folds = []
    for g in groups:
        test = tuple(subs[i] for i in sorted(g))
        test_set = set(test)
        folds.append(Fold(train=tuple(s for s in subs if s not in test_set), test=test))
    return FoldPlan(tuple(folds))


def split_records(records, fold: Fold):
    test = set(fold.test)
    train = [r for r in records if r.subject not in test]
    held = [r for r in records if r.subject in test]
    return train, held
