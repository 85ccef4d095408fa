# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gini split scan.

Must stay arithmetically identical to ``_gini_py.gini_scan``: integer class
counts, then one double division per side, summed left-term-first. Any
deviation breaks the guarantee that compiled and fallback forests are
bit-identical.
"""

from libc.math cimport INFINITY


def gini_scan(const double[::1] xs, const long long[::1] ys):
    """Scan all split positions of one sorted feature column.

    xs must be ascending; ys holds 0/1 labels aligned to xs. A position i
    splits rows [0..i] | [i+1..n-1] and is valid only when xs[i] < xs[i+1].
    Returns (best_pos, best_score) maximizing
    (l0^2+l1^2)/nL + (r0^2+r1^2)/nR, first position winning ties;
    (-1, -inf) when no valid split exists.
    """
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t i, best_pos = -1
    cdef long long l1 = 0, l0 = 0, t1 = 0, r0, r1, nl, nr
    cdef double score, best_score = -INFINITY

    if n < 2:
        return -1, best_score

    for i in range(n):
        t1 += ys[i]

    for i in range(n - 1):
        l1 += ys[i]
        l0 = (i + 1) - l1
        if xs[i] == xs[i + 1]:
            continue
        nl = i + 1
        nr = n - nl
        r1 = t1 - l1
        r0 = nr - r1
        score = (<double> (l0 * l0 + l1 * l1)) / (<double> nl) \
            + (<double> (r0 * r0 + r1 * r1)) / (<double> nr)
        if score > best_score:
            best_score = score
            best_pos = i

    return best_pos, best_score
