"""Stratified 60/20/20 train/validation/test split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvariantError


@dataclass(frozen=True)
class TrainTestSplit:
    train: list[int]
    validation: list[int]
    test: list[int]
    seed: int

    def __post_init__(self) -> None:
        all_idx = self.train + self.validation + self.test
        if len(set(all_idx)) != len(all_idx):
            raise InvariantError("split parts overlap")


def split_dataset(n_rows: int, labels: list[str], seed: int) -> TrainTestSplit:
    """Seeded stratified shuffle into 60/20/20 (per-class rounding, ±1 row)."""
    if len(labels) != n_rows:
        raise InvariantError("labels length does not match n_rows")
    classes: dict[str, list[int]] = {}
    for i, label in enumerate(labels):
        classes.setdefault(label, []).append(i)
    for label, idx in classes.items():
        if len(idx) < 5:
            raise InvariantError(f"class {label!r} has fewer than 5 rows")

    rng = np.random.default_rng(seed)
    train: list[int] = []
    validation: list[int] = []
    test: list[int] = []
    for label in sorted(classes):
        idx = np.array(classes[label])
        rng.shuffle(idx)
        n = len(idx)
        n_train = int(round(0.6 * n))
        n_val = int(round(0.2 * n))
        train.extend(int(i) for i in idx[:n_train])
        validation.extend(int(i) for i in idx[n_train:n_train + n_val])
        test.extend(int(i) for i in idx[n_train + n_val:])
    return TrainTestSplit(train=train, validation=validation, test=test, seed=seed)
