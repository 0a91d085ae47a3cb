"""Pure-numpy reference kernels.

Every function here has a twin of the same name in ``_kernels_numba``; the two
must agree to rounding. Inputs are assumed validated by the callers.
"""

import numpy as np

_ROW_CHUNK = 64
_SIGN_CHUNK = 1 << 14


def pair_gap_max(M, v, squared):
    """Max over member pairs a < b of ``|sum_i v_i * loss(M[a, i], M[b, i])|``.

    Returns ``(value, a, b)`` with the first maximizing pair in row-major
    order; ``(0.0, 0, 0)`` when fewer than two members exist.
    """
    k = M.shape[0]
    best, best_a, best_b = 0.0, 0, 0
    for start in range(0, k, _ROW_CHUNK):
        rows = M[start:start + _ROW_CHUNK]
        diff = rows[:, None, :] - M[None, :, :]
        diff = diff * diff if squared else np.abs(diff)
        gaps = np.abs(diff @ v)
        for r in range(rows.shape[0]):
            a = start + r
            if a + 1 >= k:
                continue
            tail = gaps[r, a + 1:]
            j = int(np.argmax(tail))
            if tail[j] > best:
                best, best_a, best_b = float(tail[j]), a, a + 1 + j
    return best, best_a, best_b


def member_abs_risks(M, idx, targets, weights):
    """Per-member ``sum_j weights_j * |M[k, idx_j] - targets_j|``.

    Summed left to right (not via BLAS) so members with equal risk get equal
    floats, which exact tie detection in ERM relies on.
    """
    if idx.shape[0] == 0:
        return np.zeros(M.shape[0])
    return np.cumsum(weights[None, :] * np.abs(M[:, idx] - targets[None, :]), axis=1)[:, -1]


def rademacher_exact_total(V):
    """Sum over all sign vectors of ``max_k |sigma . V[k]|``."""
    k, m = V.shape
    total = 0.0
    n_sigma = 1 << m
    bits = np.arange(m, dtype=np.int64)
    for start in range(0, n_sigma, _SIGN_CHUNK):
        s = np.arange(start, min(start + _SIGN_CHUNK, n_sigma), dtype=np.int64)
        signs = np.where((s[:, None] >> bits[None, :]) & 1, 1.0, -1.0)
        total += float(np.abs(signs @ V.T).max(axis=1).sum())
    return total


def rademacher_sup_values(V, signs):
    """``max_k |signs[t] . V[k]|`` for every row ``t`` of ``signs``."""
    return np.abs(signs @ V.T).max(axis=1)
