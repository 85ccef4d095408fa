"""Recursive feature elimination with a logistic-regression estimator.

Each round fits the estimator on the surviving features and removes the ones
with the smallest absolute coefficient (ties: lower catalog index goes
first). The K-sweep then trains on the top-K prefix for each K in the grid
and picks the smallest K whose validation accuracy is within half a
percentage point of the best.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvariantError, SchemaError
from .models.logistic import train_lr

# Smallest K within this many accuracy points of the best is chosen.
SWEEP_TOLERANCE = 0.005


def default_grid(n_features: int = 187) -> list[int]:
    grid = list(range(5, n_features, 5))
    if n_features not in grid:
        grid.append(n_features)
    return grid


@dataclass
class SelectionResult:
    ranking: list[int]                 # catalog indices, eliminated-last first
    chosen_k: int
    sweep_scores: dict[int, float]
    names: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if sorted(self.ranking) != list(range(len(self.ranking))):
            raise InvariantError("ranking is not a permutation of feature indices")
        if not 1 <= self.chosen_k <= len(self.ranking):
            raise InvariantError("chosen_k out of range")

    @property
    def selected(self) -> list[int]:
        return self.ranking[: self.chosen_k]

    def selected_names(self) -> list[str]:
        if self.names is None:
            raise InvariantError("selection has no feature names attached")
        return [self.names[i] for i in self.selected]

    def ranked_names(self) -> list[str]:
        if self.names is None:
            raise InvariantError("selection has no feature names attached")
        return [self.names[i] for i in self.ranking]

    def to_json(self) -> str:
        doc = {
            "ranking": self.ranked_names() if self.names else self.ranking,
            "chosen_k": self.chosen_k,
            "sweep": {str(k): v for k, v in sorted(self.sweep_scores.items())},
        }
        if self.names:
            doc["selected"] = self.selected_names()
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, names: Sequence[str]) -> "SelectionResult":
        try:
            doc = json.loads(text)
            name_index = {name: i for i, name in enumerate(names)}
            ranking = [name_index[n] for n in doc["ranking"]]
            return cls(
                ranking=ranking,
                chosen_k=int(doc["chosen_k"]),
                sweep_scores={int(k): float(v) for k, v in doc["sweep"].items()},
                names=tuple(names),
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise SchemaError(f"bad selection document: {exc}")


def _check_training_inputs(data: np.ndarray, labels: np.ndarray) -> None:
    if np.isnan(data).any():
        raise InvariantError("selection requires a preprocessed matrix (no absents)")
    counts = np.bincount(labels, minlength=2)
    if counts[0] < 2 or counts[1] < 2:
        raise InvariantError("selection needs at least 2 rows per class")


def rfe(data: np.ndarray, labels: np.ndarray, step: int = 1) -> list[int]:
    """Feature ranking by recursive elimination; eliminated-last comes first."""
    _check_training_inputs(data, labels)
    if step < 1:
        raise InvariantError("step must be >= 1")
    surviving = list(range(data.shape[1]))
    eliminated: list[int] = []
    while surviving:
        model = train_lr(data[:, surviving], labels)
        weights = np.abs(model.weights)
        # sort by (|coef|, catalog index): weakest first, lower index breaking ties
        order = sorted(range(len(surviving)), key=lambda i: (weights[i], surviving[i]))
        drop = [surviving[i] for i in order[: min(step, len(surviving))]]
        for feature in drop:
            eliminated.append(feature)
            surviving.remove(feature)
    return eliminated[::-1]


def _accuracy(scores: np.ndarray, labels: np.ndarray) -> float:
    return float(((scores >= 0.5).astype(int) == labels).mean())


def sweep_k(
    train_data: np.ndarray,
    train_labels: np.ndarray,
    val_data: np.ndarray,
    val_labels: np.ndarray,
    grid: Optional[Sequence[int]] = None,
    step: int = 1,
    names: Optional[Sequence[str]] = None,
) -> SelectionResult:
    """Rank on the training split, score each top-K on validation, and pick
    the smallest K within SWEEP_TOLERANCE of the best accuracy."""
    d = train_data.shape[1]
    if grid is None:
        grid = default_grid(d)
    if not grid:
        raise InvariantError("sweep grid is empty")
    for k in grid:
        if not 1 <= k <= d:
            raise InvariantError(f"grid value {k} outside 1..{d}")
    if val_data.shape[1] != d:
        raise InvariantError("validation matrix has a different feature count")

    ranking = rfe(train_data, train_labels, step=step)
    scores: dict[int, float] = {}
    for k in sorted(set(int(k) for k in grid)):
        cols = ranking[:k]
        model = train_lr(train_data[:, cols], train_labels)
        scores[k] = _accuracy(model.predict_proba(val_data[:, cols]), val_labels)

    best = max(scores.values())
    chosen_k = min(k for k, acc in scores.items() if acc >= best - SWEEP_TOLERANCE)
    return SelectionResult(
        ranking=ranking,
        chosen_k=chosen_k,
        sweep_scores=scores,
        names=tuple(names) if names is not None else None,
    )
