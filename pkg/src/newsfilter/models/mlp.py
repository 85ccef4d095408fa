"""Small feed-forward classifier: batch-norm, one relu layer, dropout, softmax.

Training runs R independent seeded restarts ("rounds") of E epochs each with
minibatch adaptive-moment updates; the weights from the round with the best
validation accuracy are kept and the mean accuracy/loss across rounds is
recorded. Inference disables dropout and normalizes with running statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvariantError

BN_EPS = 1e-5
BN_MOMENTUM = 0.9
PARAM_NAMES = ("gamma", "beta", "w1", "b1", "w2", "b2")


def _init_params(d: int, hidden: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    return {
        "gamma": np.ones(d),
        "beta": np.zeros(d),
        "w1": rng.normal(0.0, np.sqrt(2.0 / d), size=(d, hidden)),
        "b1": np.zeros(hidden),
        "w2": rng.normal(0.0, np.sqrt(2.0 / hidden), size=(hidden, 2)),
        "b2": np.zeros(2),
    }


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _forward_train(params: dict, x: np.ndarray, dropout_mask: np.ndarray | None):
    """Training-mode forward pass (batch statistics); returns probs and cache."""
    m = x.shape[0]
    mu = x.mean(axis=0)
    var = x.var(axis=0)
    ivar = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mu) * ivar
    h0 = params["gamma"] * xhat + params["beta"]
    z1 = h0 @ params["w1"] + params["b1"]
    a1 = np.maximum(z1, 0.0)
    a1d = a1 if dropout_mask is None else a1 * dropout_mask
    z2 = a1d @ params["w2"] + params["b2"]
    probs = _softmax(z2)
    cache = (x, mu, var, ivar, xhat, h0, z1, a1, a1d, dropout_mask, m)
    return probs, cache


def _loss(probs: np.ndarray, y: np.ndarray) -> float:
    picked = np.clip(probs[np.arange(len(y)), y], 1e-12, None)
    return float(-np.log(picked).mean())


def _backward(params: dict, probs: np.ndarray, y: np.ndarray, cache) -> dict:
    x, mu, var, ivar, xhat, h0, z1, a1, a1d, dropout_mask, m = cache
    grads = {}
    dz2 = probs.copy()
    dz2[np.arange(len(y)), y] -= 1.0
    dz2 /= len(y)

    grads["w2"] = a1d.T @ dz2
    grads["b2"] = dz2.sum(axis=0)
    da1d = dz2 @ params["w2"].T
    da1 = da1d if dropout_mask is None else da1d * dropout_mask
    dz1 = da1 * (z1 > 0.0)
    grads["w1"] = h0.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    dh0 = dz1 @ params["w1"].T

    grads["gamma"] = (dh0 * xhat).sum(axis=0)
    grads["beta"] = dh0.sum(axis=0)
    dxhat = dh0 * params["gamma"]
    centered = x - mu
    dvar = (dxhat * centered).sum(axis=0) * (-0.5) * ivar ** 3
    dmu = -(dxhat.sum(axis=0)) * ivar + dvar * (-2.0 * centered.mean(axis=0))
    grads["x"] = dxhat * ivar + dvar * 2.0 * centered / m + dmu / m
    return grads


@dataclass
class MlpModel:
    params: dict[str, np.ndarray]
    running_mean: np.ndarray
    running_var: np.ndarray
    hidden: int
    hyperparams: dict = field(default_factory=dict)
    training_summary: dict = field(default_factory=dict)

    @property
    def input_dim(self) -> int:
        return self.params["w1"].shape[0]

    def predict_proba(self, data: np.ndarray) -> np.ndarray:
        """Inference mode: running statistics, dropout disabled."""
        if data.shape[1] != self.input_dim:
            raise InvariantError(
                f"matrix has {data.shape[1]} features, model expects {self.input_dim}"
            )
        xhat = (data - self.running_mean) / np.sqrt(self.running_var + BN_EPS)
        h0 = self.params["gamma"] * xhat + self.params["beta"]
        a1 = np.maximum(h0 @ self.params["w1"] + self.params["b1"], 0.0)
        return _softmax(a1 @ self.params["w2"] + self.params["b2"])[:, 1]


def parameter_count(model: MlpModel) -> int:
    """Trainable parameters only; running statistics are buffers."""
    return sum(model.params[name].size for name in PARAM_NAMES)


def train_mlp(
    data: np.ndarray,
    labels: np.ndarray,
    val_data: np.ndarray | None = None,
    val_labels: np.ndarray | None = None,
    hidden: int = 20,
    rounds: int = 10,
    epochs: int = 50,
    batch_size: int = 32,
    learning_rate: float = 1e-3,
    dropout: float = 0.1,
    seed: int = 0,
) -> MlpModel:
    if not np.all(np.isfinite(data)):
        raise InvariantError("training matrix contains non-finite values")
    if set(np.unique(labels)) != {0, 1}:
        raise InvariantError("training labels must contain both classes")
    n, d = data.shape
    keep = 1.0 - dropout

    best = None  # (val_accuracy, -round_index, model)
    round_stats = []
    for r in range(rounds):
        rng = np.random.default_rng(seed + r)
        params = _init_params(d, hidden, rng)
        running_mean = np.zeros(d)
        running_var = np.ones(d)
        adam_m = {k: np.zeros_like(v) for k, v in params.items()}
        adam_v = {k: np.zeros_like(v) for k, v in params.items()}
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        step = 0

        for _ in range(epochs):
            order = rng.permutation(n)
            for start in range(0, n, batch_size):
                batch = order[start:start + batch_size]
                if len(batch) < 2:
                    continue  # batch statistics need at least two rows
                x, y = data[batch], labels[batch]
                mask = (rng.random((len(batch), hidden)) >= dropout) / keep
                probs, cache = _forward_train(params, x, mask)
                grads = _backward(params, probs, y, cache)
                running_mean = BN_MOMENTUM * running_mean + (1 - BN_MOMENTUM) * cache[1]
                running_var = BN_MOMENTUM * running_var + (1 - BN_MOMENTUM) * cache[2]
                step += 1
                for name in PARAM_NAMES:
                    g = grads[name]
                    adam_m[name] = beta1 * adam_m[name] + (1 - beta1) * g
                    adam_v[name] = beta2 * adam_v[name] + (1 - beta2) * g * g
                    m_hat = adam_m[name] / (1 - beta1 ** step)
                    v_hat = adam_v[name] / (1 - beta2 ** step)
                    params[name] -= learning_rate * m_hat / (np.sqrt(v_hat) + eps)

        model = MlpModel(
            params={k: v.copy() for k, v in params.items()},
            running_mean=running_mean.copy(),
            running_var=running_var.copy(),
            hidden=hidden,
        )
        train_scores = model.predict_proba(data)
        train_acc = float(((train_scores >= 0.5).astype(int) == labels).mean())
        train_loss = _eval_loss(model, data, labels)
        stats = {"round": r, "train_accuracy": train_acc, "train_loss": train_loss}
        if val_data is not None and val_labels is not None:
            val_scores = model.predict_proba(val_data)
            val_acc = float(((val_scores >= 0.5).astype(int) == val_labels).mean())
            stats["val_accuracy"] = val_acc
            stats["val_loss"] = _eval_loss(model, val_data, val_labels)
            key = (val_acc, -r)
        else:
            key = (-train_loss, -r)
        round_stats.append(stats)
        if best is None or key > best[0]:
            best = (key, model)

    model = best[1]
    model.hyperparams = {
        "hidden": hidden, "rounds": rounds, "epochs": epochs,
        "batch_size": batch_size, "learning_rate": learning_rate,
        "dropout": dropout, "seed": seed,
    }
    summary = {"rounds": round_stats}
    for metric in ("train_accuracy", "train_loss", "val_accuracy", "val_loss"):
        values = [s[metric] for s in round_stats if metric in s]
        if values:
            summary[f"mean_{metric}"] = float(np.mean(values))
    model.training_summary = summary
    return model


def _eval_loss(model: MlpModel, data: np.ndarray, labels: np.ndarray) -> float:
    p1 = np.clip(model.predict_proba(data), 1e-12, 1 - 1e-12)
    probs = np.column_stack([1.0 - p1, p1])
    return _loss(probs, labels)


def finite_difference_check(
    model: MlpModel,
    batch: np.ndarray,
    labels: np.ndarray,
    epsilon: float = 1e-5,
) -> float:
    """Compare analytic gradients against central differences on every
    parameter; returns max |analytic - numeric| / max(1, |analytic|, |numeric|).

    Runs in training mode (batch statistics) with dropout disabled so the
    loss is a deterministic function of the parameters.
    """
    if batch.shape[0] < 2:
        raise InvariantError("gradient check needs at least 2 rows for batch statistics")
    params = {k: v.copy() for k, v in model.params.items()}
    probs, cache = _forward_train(params, batch, None)
    grads = _backward(params, probs, labels, cache)

    worst = 0.0
    for name in PARAM_NAMES:
        flat = params[name].reshape(-1)
        analytic = grads[name].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + epsilon
            up = _loss(_forward_train(params, batch, None)[0], labels)
            flat[i] = original - epsilon
            down = _loss(_forward_train(params, batch, None)[0], labels)
            flat[i] = original
            numeric = (up - down) / (2.0 * epsilon)
            denom = max(1.0, abs(analytic[i]), abs(numeric))
            worst = max(worst, abs(analytic[i] - numeric) / denom)
    return worst
