"""NumPy fallback for the Gini split scan.

Mirrors ``_gini_cy.gini_scan`` operation for operation: class counts stay in
int64 (exact), each side contributes exactly one float64 division, and the two
terms are added left-first, so both backends return identical floats and the
same argmax position.
"""

from __future__ import annotations

import numpy as np


def gini_scan(xs: np.ndarray, ys: np.ndarray) -> tuple[int, float]:
    """Vectorized equivalent of the compiled scan; see _gini_cy.gini_scan."""
    n = xs.shape[0]
    if n < 2:
        return -1, float("-inf")

    cum1 = np.cumsum(ys, dtype=np.int64)
    nl = np.arange(1, n, dtype=np.int64)
    l1 = cum1[:-1]
    l0 = nl - l1
    nr = n - nl
    r1 = cum1[-1] - l1
    r0 = nr - r1

    score = (l0 * l0 + l1 * l1).astype(np.float64) / nl.astype(np.float64) \
        + (r0 * r0 + r1 * r1).astype(np.float64) / nr.astype(np.float64)
    score[xs[:-1] == xs[1:]] = -np.inf

    best_pos = int(np.argmax(score))
    best_score = float(score[best_pos])
    if best_score == -np.inf:
        return -1, best_score
    return best_pos, best_score
