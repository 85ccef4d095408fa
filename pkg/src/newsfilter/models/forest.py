"""Random forest of CART trees (Gini impurity, bootstrap rows, sqrt-d splits).

The per-node split search runs through the selected kernel backend (compiled
or NumPy, identical results), so forests are reproducible bit-for-bit across
backends. Trees derive their seeds as seed + tree index, which makes any
parallel training schedule equal to the sequential one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvariantError
from .. import _kernels


@dataclass
class Tree:
    """Flat-array CART tree. Children of internal node i are left[i]/right[i];
    leaves have feature -1 and carry per-class sample counts."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    counts: list[tuple[int, int]] = field(default_factory=list)

    def add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.counts.append((0, 0))
        return len(self.feature) - 1

    def apply(self, data: np.ndarray) -> np.ndarray:
        """Leaf index for every row."""
        node = np.zeros(data.shape[0], dtype=np.int64)
        feature = np.array(self.feature)
        threshold = np.array(self.threshold)
        left = np.array(self.left)
        right = np.array(self.right)
        while True:
            internal = feature[node] >= 0
            if not internal.any():
                return node
            rows = np.nonzero(internal)[0]
            cur = node[rows]
            goes_left = data[rows, feature[cur]] <= threshold[cur]
            node[rows] = np.where(goes_left, left[cur], right[cur])

    def leaf_proba(self, data: np.ndarray) -> np.ndarray:
        counts = np.array(self.counts, dtype=np.float64)
        leaf = self.apply(data)
        totals = counts[leaf].sum(axis=1)
        return counts[leaf, 1] / totals


@dataclass
class RandomForestModel:
    trees: list[Tree]
    feature_count: int
    seed: int
    hyperparams: dict = field(default_factory=dict)

    def predict_proba(self, data: np.ndarray) -> np.ndarray:
        if data.shape[1] != self.feature_count:
            raise InvariantError(
                f"matrix has {data.shape[1]} features, model expects {self.feature_count}"
            )
        votes = np.zeros(data.shape[0])
        for tree in self.trees:
            votes += tree.leaf_proba(data)
        return votes / len(self.trees)


def _build_tree(data: np.ndarray, labels: np.ndarray, rng: np.random.Generator,
                mtry: int) -> Tree:
    tree = Tree()
    n = data.shape[0]
    d = data.shape[1]
    root_rows = rng.integers(0, n, size=n)  # bootstrap sample
    root = tree.add_node()
    stack = [(root, root_rows)]
    while stack:
        node, rows = stack.pop()
        ys = labels[rows]
        c1 = int(ys.sum())
        c0 = len(rows) - c1
        tree.counts[node] = (c0, c1)
        if c0 == 0 or c1 == 0 or len(rows) < 2:
            continue

        candidates = rng.choice(d, size=mtry, replace=False)
        best_score = -np.inf
        best = None
        for f in candidates:
            xs = data[rows, f]
            order = np.argsort(xs, kind="stable")
            # looked up through the module so benchmarks/tests can pin a backend
            pos, score = _kernels.gini_scan(
                np.ascontiguousarray(xs[order]),
                np.ascontiguousarray(ys[order]),
            )
            if pos >= 0 and score > best_score:
                best_score = score
                lo = xs[order[pos]]
                hi = xs[order[pos + 1]]
                threshold = (lo + hi) / 2.0
                if threshold >= hi:  # adjacent floats: midpoint rounded up
                    threshold = lo
                best = (int(f), float(threshold))
        if best is None:
            continue

        f, threshold = best
        goes_left = data[rows, f] <= threshold
        tree.feature[node] = f
        tree.threshold[node] = threshold
        left = tree.add_node()
        right = tree.add_node()
        tree.left[node] = left
        tree.right[node] = right
        stack.append((right, rows[~goes_left]))
        stack.append((left, rows[goes_left]))
    return tree


def train_rf(
    data: np.ndarray,
    labels: np.ndarray,
    n_trees: int = 100,
    seed: int = 0,
) -> RandomForestModel:
    """Bootstrap-aggregated CART trees, unlimited depth, min leaf 1."""
    if not np.all(np.isfinite(data)):
        raise InvariantError("training matrix contains non-finite values")
    if set(np.unique(labels)) != {0, 1}:
        raise InvariantError("training labels must contain both classes")
    data = np.ascontiguousarray(data, dtype=np.float64)
    labels = labels.astype(np.int64)
    d = data.shape[1]
    mtry = max(1, int(round(math.sqrt(d))))
    trees = [
        _build_tree(data, labels, np.random.default_rng(seed + t), mtry)
        for t in range(n_trees)
    ]
    return RandomForestModel(
        trees=trees,
        feature_count=d,
        seed=seed,
        hyperparams={"n_trees": n_trees, "mtry": mtry, "criterion": "gini"},
    )
