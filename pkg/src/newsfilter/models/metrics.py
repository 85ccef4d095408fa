"""Binary classification metrics: support-weighted per-class rates plus AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvariantError


@dataclass(frozen=True)
class Metrics:
    tp_rate: float
    fp_rate: float
    precision: float
    recall: float
    f1: float
    auc: float

    def as_dict(self) -> dict[str, float]:
        return {
            "tp_rate": self.tp_rate, "fp_rate": self.fp_rate,
            "precision": self.precision, "recall": self.recall,
            "f1": self.f1, "auc": self.auc,
        }


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Trapezoidal area under the ROC sweep; tied scores advance TPR and FPR
    together, which credits ties with 0.5 (the Mann-Whitney convention)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InvariantError("AUC undefined: labels contain a single class")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]

    tpr_points = [0.0]
    fpr_points = [0.0]
    tp = fp = 0
    i = 0
    n = len(scores)
    while i < n:
        j = i
        while j < n and sorted_scores[j] == sorted_scores[i]:
            j += 1
        group = sorted_labels[i:j]
        tp += int(group.sum())
        fp += len(group) - int(group.sum())
        tpr_points.append(tp / n_pos)
        fpr_points.append(fp / n_neg)
        i = j
    return float(np.trapezoid(tpr_points, fpr_points))


def evaluate(scores, labels, threshold: float = 0.5) -> Metrics:
    """Support-weighted per-class precision/recall/F1/TPR/FPR plus AUC.

    scores are fake-class probabilities; rows with score >= threshold are
    predicted fake.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape:
        raise InvariantError("scores and labels must have equal length")
    if set(np.unique(labels)) != {0, 1}:
        raise InvariantError("evaluation requires both classes present")

    predictions = (scores >= threshold).astype(np.int64)
    weighted = {"tp_rate": 0.0, "fp_rate": 0.0, "precision": 0.0,
                "recall": 0.0, "f1": 0.0}
    total = len(labels)
    for cls in (0, 1):
        support = int((labels == cls).sum())
        tp = int(((labels == cls) & (predictions == cls)).sum())
        fn = support - tp
        fp = int(((labels != cls) & (predictions == cls)).sum())
        tn = total - support - fp
        recall = tp / (tp + fn) if tp + fn else 0.0
        precision = tp / (tp + fp) if tp + fp else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        fpr = fp / (fp + tn) if fp + tn else 0.0
        w = support / total
        weighted["tp_rate"] += w * recall
        weighted["fp_rate"] += w * fpr
        weighted["precision"] += w * precision
        weighted["recall"] += w * recall
        weighted["f1"] += w * f1

    return Metrics(auc=roc_auc(scores, labels), **weighted)
