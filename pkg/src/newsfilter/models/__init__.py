"""From-scratch classifier suite: LR, Gaussian NB, random forest, MLP.

All trainers are deterministic given (data, hyperparameters, seed) and
operate on preprocessed float64 matrices with integer labels (0 = real,
1 = fake). ``predict_proba`` always returns the per-row probability of the
fake class.
"""

from .splitting import TrainTestSplit, split_dataset
from .logistic import LogisticRegressionModel, train_lr
from .naive_bayes import GaussianNBModel, train_gnb
from .forest import RandomForestModel, train_rf
from .mlp import MlpModel, train_mlp, finite_difference_check, parameter_count
from .metrics import Metrics, evaluate, roc_auc
from .io import ModelBundle, save_model, load_model

LABEL_TO_INT = {"real": 0, "fake": 1}


def labels_to_int(labels):
    import numpy as np

    return np.array([LABEL_TO_INT[label] for label in labels], dtype=np.int64)


__all__ = [
    "TrainTestSplit", "split_dataset",
    "LogisticRegressionModel", "train_lr",
    "GaussianNBModel", "train_gnb",
    "RandomForestModel", "train_rf",
    "MlpModel", "train_mlp", "finite_difference_check", "parameter_count",
    "Metrics", "evaluate", "roc_auc",
    "ModelBundle", "save_model", "load_model",
    "LABEL_TO_INT", "labels_to_int",
]
