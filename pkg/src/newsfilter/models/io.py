"""Versioned model persistence and the scoring bundle.

A bundle ties together everything needed to score raw records: the fitted
preprocessor (full catalog), the selected feature names, the classifier
parameters and the training metadata (hyperparams, seeds, input hashes).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import InvariantError, SchemaError
from ..preprocess import FittedPreprocessor
from .forest import RandomForestModel, Tree
from .logistic import LogisticRegressionModel
from .mlp import MlpModel
from .naive_bayes import GaussianNBModel

FORMAT = "newsfilter-model"
VERSION = 1

KINDS = ("lr", "gnb", "rf", "mlp")


@dataclass
class ModelBundle:
    kind: str
    model: Any
    preprocessor: FittedPreprocessor
    selected_features: list[str]
    metadata: dict = field(default_factory=dict)

    def score_matrix(self, matrix) -> np.ndarray:
        """Fake-class probability per row of a full-catalog FeatureMatrix."""
        if tuple(matrix.catalog.names) != self.preprocessor.feature_names:
            raise InvariantError("matrix catalog does not match bundle preprocessor")
        data, _ = matrix.to_arrays()
        transformed = self.preprocessor.transform_array(data)
        index = {name: i for i, name in enumerate(self.preprocessor.feature_names)}
        cols = [index[name] for name in self.selected_features]
        return self.model.predict_proba(transformed[:, cols])


def _params_out(kind: str, model: Any) -> dict:
    if kind == "lr":
        return {
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "hyperparams": model.hyperparams,
        }
    if kind == "gnb":
        return {
            "class_prior": model.class_prior.tolist(),
            "theta": model.theta.tolist(),
            "var": model.var.tolist(),
        }
    if kind == "rf":
        return {
            "seed": model.seed,
            "feature_count": model.feature_count,
            "hyperparams": model.hyperparams,
            "trees": [
                {
                    "feature": t.feature,
                    "threshold": t.threshold,
                    "left": t.left,
                    "right": t.right,
                    "counts": [list(c) for c in t.counts],
                }
                for t in model.trees
            ],
        }
    if kind == "mlp":
        return {
            "params": {k: v.tolist() for k, v in model.params.items()},
            "running_mean": model.running_mean.tolist(),
            "running_var": model.running_var.tolist(),
            "hidden": model.hidden,
            "hyperparams": model.hyperparams,
            "training_summary": model.training_summary,
        }
    raise InvariantError(f"unknown model kind {kind!r}")


def _params_in(kind: str, doc: dict) -> Any:
    if kind == "lr":
        return LogisticRegressionModel(
            weights=np.array(doc["weights"]),
            bias=float(doc["bias"]),
            hyperparams=doc.get("hyperparams", {}),
        )
    if kind == "gnb":
        return GaussianNBModel(
            class_prior=np.array(doc["class_prior"]),
            theta=np.array(doc["theta"]),
            var=np.array(doc["var"]),
        )
    if kind == "rf":
        trees = [
            Tree(
                feature=list(t["feature"]),
                threshold=[float(x) for x in t["threshold"]],
                left=list(t["left"]),
                right=list(t["right"]),
                counts=[tuple(c) for c in t["counts"]],
            )
            for t in doc["trees"]
        ]
        return RandomForestModel(
            trees=trees,
            feature_count=int(doc["feature_count"]),
            seed=int(doc["seed"]),
            hyperparams=doc.get("hyperparams", {}),
        )
    if kind == "mlp":
        return MlpModel(
            params={k: np.array(v) for k, v in doc["params"].items()},
            running_mean=np.array(doc["running_mean"]),
            running_var=np.array(doc["running_var"]),
            hidden=int(doc["hidden"]),
            hyperparams=doc.get("hyperparams", {}),
            training_summary=doc.get("training_summary", {}),
        )
    raise SchemaError(f"unknown model kind {kind!r}")


def save_model(bundle: ModelBundle, path: str) -> None:
    if bundle.kind not in KINDS:
        raise InvariantError(f"unknown model kind {bundle.kind!r}")
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": bundle.kind,
        "selected_features": bundle.selected_features,
        "preprocessor": json.loads(bundle.preprocessor.to_json()),
        "params": _params_out(bundle.kind, bundle.model),
        "metadata": bundle.metadata,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, sort_keys=True)
        handle.write("\n")


def load_model(path: str) -> ModelBundle:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: malformed model file ({exc.msg})")
    if doc.get("format") != FORMAT:
        raise SchemaError(f"{path}: not a {FORMAT} document")
    if doc.get("version") != VERSION:
        raise SchemaError(f"{path}: unsupported version {doc.get('version')}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"{path}: unknown model kind {kind!r}")
    preprocessor = FittedPreprocessor.from_json(json.dumps(doc["preprocessor"]))
    return ModelBundle(
        kind=kind,
        model=_params_in(kind, doc["params"]),
        preprocessor=preprocessor,
        selected_features=list(doc["selected_features"]),
        metadata=doc.get("metadata", {}),
    )
