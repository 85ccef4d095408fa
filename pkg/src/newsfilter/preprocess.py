"""Preprocessing: HTTP-status summarization, imputation, normalization.

Imputation values and normalization parameters are fitted on training rows
only and then reused verbatim for validation/test/serving, so no statistics
leak across the split boundary. Imputation uses the training-column median
(robust against the heavy-tailed web metrics); normalization is a z-score.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, SchemaError

SD_FLOOR = 1e-12


def summarize_status(code: int) -> str:
    """Collapse an HTTP status code to its class, e.g. 201 -> "2**"."""
    if not 100 <= code <= 599:
        raise InvariantError(f"status code {code} outside 100-599")
    return f"{code // 100}**"


@dataclass(frozen=True)
class FittedPreprocessor:
    feature_names: tuple[str, ...]
    impute: np.ndarray
    mean: np.ndarray
    sd: np.ndarray

    def __post_init__(self) -> None:
        k = len(self.feature_names)
        for name in ("impute", "mean", "sd"):
            if getattr(self, name).shape != (k,):
                raise InvariantError(f"preprocessor {name} must have shape ({k},)")
        if np.any(self.sd < SD_FLOOR):
            raise InvariantError("preprocessor sd below floor")

    def transform_array(self, data: np.ndarray) -> np.ndarray:
        """Impute NaNs with the fitted medians, then z-score. Never emits NaN."""
        if data.ndim != 2 or data.shape[1] != len(self.feature_names):
            raise InvariantError(
                f"matrix has {data.shape[1:]} columns, preprocessor expects "
                f"{len(self.feature_names)}"
            )
        filled = np.where(np.isnan(data), self.impute, data)
        return (filled - self.mean) / self.sd

    def restrict(self, names: list[str]) -> "FittedPreprocessor":
        index = {name: i for i, name in enumerate(self.feature_names)}
        missing = [n for n in names if n not in index]
        if missing:
            raise InvariantError(f"preprocessor lacks features: {missing}")
        idx = [index[n] for n in names]
        return FittedPreprocessor(
            feature_names=tuple(names),
            impute=self.impute[idx].copy(),
            mean=self.mean[idx].copy(),
            sd=self.sd[idx].copy(),
        )

    def to_json(self) -> str:
        doc = {
            name: {
                "impute": float(self.impute[i]),
                "mean": float(self.mean[i]),
                "sd": float(self.sd[i]),
            }
            for i, name in enumerate(self.feature_names)
        }
        return json.dumps({"features": list(self.feature_names), "params": doc},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FittedPreprocessor":
        try:
            doc = json.loads(text)
            names = tuple(doc["features"])
            params = doc["params"]
            impute = np.array([params[n]["impute"] for n in names])
            mean = np.array([params[n]["mean"] for n in names])
            sd = np.array([params[n]["sd"] for n in names])
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise SchemaError(f"bad preprocessor document: {exc}")
        return cls(feature_names=names, impute=impute, mean=mean, sd=sd)


def fit_arrays(data: np.ndarray, names: list[str]) -> FittedPreprocessor:
    if data.shape[0] == 0:
        raise InvariantError("cannot fit preprocessor on an empty matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns
        impute = np.nanmedian(data, axis=0)
    impute = np.where(np.isnan(impute), 0.0, impute)  # all-absent column
    filled = np.where(np.isnan(data), impute, data)
    mean = filled.mean(axis=0)
    sd = np.maximum(filled.std(axis=0), SD_FLOOR)
    return FittedPreprocessor(
        feature_names=tuple(names), impute=impute, mean=mean, sd=sd
    )


def fit(matrix) -> FittedPreprocessor:
    """Fit imputation and normalization parameters on a training FeatureMatrix."""
    data, _ = matrix.to_arrays()
    return fit_arrays(data, list(matrix.catalog.names))


def transform(fitted: FittedPreprocessor, matrix):
    """Apply a fitted preprocessor to a FeatureMatrix; output has no absents."""
    from .features import FeatureMatrix, FeatureVector

    if tuple(matrix.catalog.names) != fitted.feature_names:
        raise InvariantError("matrix catalog does not match fitted preprocessor")
    data, labels = matrix.to_arrays()
    transformed = fitted.transform_array(data)
    rows = [
        FeatureVector(
            domain=row.domain,
            label=label,
            values=[float(v) for v in transformed[i]],
        )
        for i, (row, label) in enumerate(zip(matrix.rows, labels))
    ]
    return FeatureMatrix(catalog=matrix.catalog, rows=rows)
