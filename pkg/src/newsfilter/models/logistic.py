"""Binary logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvariantError


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class LogisticRegressionModel:
    weights: np.ndarray
    bias: float
    hyperparams: dict = field(default_factory=dict)

    def predict_proba(self, data: np.ndarray) -> np.ndarray:
        if data.shape[1] != self.weights.shape[0]:
            raise InvariantError(
                f"matrix has {data.shape[1]} features, model expects {self.weights.shape[0]}"
            )
        return _sigmoid(data @ self.weights + self.bias)


def train_lr(
    data: np.ndarray,
    labels: np.ndarray,
    learning_rate: float = 0.1,
    iterations: int = 500,
    l2: float = 1e-4,
) -> LogisticRegressionModel:
    """Deterministic (zero-init) gradient descent on L2-regularized log-loss."""
    if not np.all(np.isfinite(data)):
        raise InvariantError("training matrix contains non-finite values")
    n, d = data.shape
    y = labels.astype(np.float64)
    w = np.zeros(d)
    b = 0.0
    for _ in range(iterations):
        p = _sigmoid(data @ w + b)
        residual = p - y
        grad_w = data.T @ residual / n + l2 * w
        grad_b = float(residual.mean())
        w -= learning_rate * grad_w
        b -= learning_rate * grad_b
    return LogisticRegressionModel(
        weights=w,
        bias=b,
        hyperparams={"learning_rate": learning_rate, "iterations": iterations, "l2": l2},
    )
