"""Gaussian naive Bayes with a variance floor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvariantError

VAR_FLOOR = 1e-9


@dataclass
class GaussianNBModel:
    class_prior: np.ndarray  # (2,), sums to 1
    theta: np.ndarray        # (2, d) per-class means
    var: np.ndarray          # (2, d) per-class variances, floored

    def _joint_log_likelihood(self, data: np.ndarray) -> np.ndarray:
        if data.shape[1] != self.theta.shape[1]:
            raise InvariantError(
                f"matrix has {data.shape[1]} features, model expects {self.theta.shape[1]}"
            )
        jll = np.empty((data.shape[0], 2))
        for c in range(2):
            log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * self.var[c]))
            quad = -0.5 * np.sum((data - self.theta[c]) ** 2 / self.var[c], axis=1)
            jll[:, c] = np.log(self.class_prior[c]) + log_norm + quad
        return jll

    def predict_proba(self, data: np.ndarray) -> np.ndarray:
        jll = self._joint_log_likelihood(data)
        jll -= jll.max(axis=1, keepdims=True)
        likes = np.exp(jll)
        return likes[:, 1] / likes.sum(axis=1)


def train_gnb(data: np.ndarray, labels: np.ndarray) -> GaussianNBModel:
    if not np.all(np.isfinite(data)):
        raise InvariantError("training matrix contains non-finite values")
    if set(np.unique(labels)) != {0, 1}:
        raise InvariantError("training labels must contain both classes")
    theta = np.empty((2, data.shape[1]))
    var = np.empty((2, data.shape[1]))
    prior = np.empty(2)
    for c in range(2):
        rows = data[labels == c]
        prior[c] = rows.shape[0] / data.shape[0]
        theta[c] = rows.mean(axis=0)
        var[c] = np.maximum(rows.var(axis=0), VAR_FLOOR)
    return GaussianNBModel(class_prior=prior, theta=theta, var=var)
