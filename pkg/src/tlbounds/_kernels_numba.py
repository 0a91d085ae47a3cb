"""numba-compiled kernels, one per function in ``_kernels_numpy``."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def pair_gap_max(M, v, squared):
    k, n = M.shape
    best = 0.0
    best_a = 0
    best_b = 0
    for a in range(k):
        for b in range(a + 1, k):
            acc = 0.0
            for i in range(n):
                d = M[a, i] - M[b, i]
                if squared:
                    acc += v[i] * d * d
                else:
                    acc += v[i] * abs(d)
            acc = abs(acc)
            if acc > best:
                best = acc
                best_a = a
                best_b = b
    return best, best_a, best_b


@njit(cache=True, nogil=True)
def member_abs_risks(M, idx, targets, weights):
    k = M.shape[0]
    out = np.zeros(k)
    for h in range(k):
        acc = 0.0
        for j in range(idx.shape[0]):
            acc += weights[j] * abs(M[h, idx[j]] - targets[j])
        out[h] = acc
    return out


@njit(cache=True, nogil=True)
def rademacher_exact_total(V):
    # Gray-code walk: each step flips one sign, so member sums update in O(k).
    k, m = V.shape
    sums = np.zeros(k)
    signs = -np.ones(m)
    for h in range(k):
        acc = 0.0
        for i in range(m):
            acc -= V[h, i]
        sums[h] = acc
    total = 0.0
    best = 0.0
    for h in range(k):
        if abs(sums[h]) > best:
            best = abs(sums[h])
    total += best
    n_sigma = 1 << m
    for t in range(1, n_sigma):
        j = 0
        while not (t >> j) & 1:
            j += 1
        step = -2.0 * signs[j]
        signs[j] = -signs[j]
        best = 0.0
        for h in range(k):
            sums[h] += step * V[h, j]
            s = abs(sums[h])
            if s > best:
                best = s
        total += best
    return total


@njit(cache=True, nogil=True)
def rademacher_sup_values(V, signs):
    k, m = V.shape
    draws = signs.shape[0]
    out = np.zeros(draws)
    for t in range(draws):
        best = 0.0
        for h in range(k):
            acc = 0.0
            for i in range(m):
                acc += signs[t, i] * V[h, i]
            if abs(acc) > best:
                best = abs(acc)
        out[t] = best
    return out
