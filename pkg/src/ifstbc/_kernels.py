"""Compiled inner loop for integer-matrix selection in Monte-Carlo sweeps.

Same algorithm as :func:`ifstbc.receiver.if_select_A` (LLL, zig-zag
enumeration inside the longest reduced basis vector, GF(2)-greedy pick in
ascending norm), written against fixed-size arrays so numba can compile it.
A nonzero status asks the caller to use the reference implementation.
"""

from __future__ import annotations

import numpy as np
from numba import njit

OK = 0
NOT_PD = 1
OVERFLOW = 2
INCOMPLETE = 3

MAX_RECORDS = 4096
NODE_BUDGET = 200_000


@njit(cache=True)
def _cholesky_lower(g, out):
    n = g.shape[0]
    for i in range(n):
        for j in range(i + 1):
            s = g[i, j]
            for k in range(j):
                s -= out[i, k] * out[j, k]
            if i == j:
                if s <= 0.0:
                    return False
                out[i, i] = np.sqrt(s)
            else:
                out[i, j] = s / out[j, j]
        for j in range(i + 1, n):
            out[i, j] = 0.0
    return True


@njit(cache=True)
def _gram_schmidt(b, bstar, mu, norms):
    n, m = b.shape
    for i in range(n):
        for t in range(m):
            bstar[i, t] = b[i, t]
        for j in range(i):
            dot = 0.0
            for t in range(m):
                dot += b[i, t] * bstar[j, t]
            mu[i, j] = dot / norms[j]
            for t in range(m):
                bstar[i, t] -= mu[i, j] * bstar[j, t]
        s = 0.0
        for t in range(m):
            s += bstar[i, t] * bstar[i, t]
        norms[i] = s


@njit(cache=True)
def _lll(b, u, delta):
    n, m = b.shape
    bstar = np.zeros((n, m))
    mu = np.zeros((n, n))
    norms = np.zeros(n)
    _gram_schmidt(b, bstar, mu, norms)
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            return False
        for j in range(k - 1, -1, -1):
            q = np.floor(mu[k, j] + 0.5)
            if q != 0.0:
                qi = np.int64(q)
                for t in range(m):
                    b[k, t] -= q * b[j, t]
                for t in range(n):
                    u[k, t] -= qi * u[j, t]
                for t in range(j):
                    mu[k, t] -= q * mu[j, t]
                mu[k, j] -= q
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            for t in range(m):
                tmp = b[k, t]
                b[k, t] = b[k - 1, t]
                b[k - 1, t] = tmp
            for t in range(n):
                ti = u[k, t]
                u[k, t] = u[k - 1, t]
                u[k - 1, t] = ti
            _gram_schmidt(b, bstar, mu, norms)
            if norms.min() <= 1e-300:
                return False
            k = max(k - 1, 1)
    return True


@njit(cache=True)
def _lex_greater(a, b):
    for i in range(a.shape[0]):
        if a[i] != b[i]:
            return a[i] > b[i]
    return False


@njit(cache=True)
def select_one(g, out):
    """Fill ``out`` with the selected integer matrix for Gram ``g``."""
    n = g.shape[0]
    basis = np.zeros((n, n))
    if not _cholesky_lower(g, basis):
        return NOT_PD
    u = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        u[i, i] = 1
    if not _lll(basis, u, 0.99):
        return NOT_PD

    g_red = basis @ basis.T
    radius = 0.0
    for i in range(n):
        radius = max(radius, g_red[i, i])
    radius *= 1.0 + 1e-10
    low = np.zeros((n, n))
    if not _cholesky_lower(g_red, low):
        return NOT_PD
    diag = np.empty(n)
    mu = np.zeros((n, n))
    for i in range(n):
        diag[i] = low[i, i] ** 2
        for j in range(i + 1, n):
            mu[i, j] = low[j, i] / low[i, i]

    recs = np.empty((MAX_RECORDS, n), dtype=np.int64)
    n_rec = 0
    x = np.zeros(n, dtype=np.int64)
    x0 = np.zeros(n, dtype=np.int64)
    step = np.zeros(n, dtype=np.int64)
    sgn = np.zeros(n, dtype=np.int64)
    center = np.zeros(n)
    partial = np.zeros(n + 1)
    above_zero = np.zeros(n + 1, dtype=np.bool_)
    above_zero[n] = True

    k = n - 1
    center[k] = 0.0
    x0[k] = 0
    x[k] = 0
    step[k] = 0
    sgn[k] = 1
    nodes = 0
    while True:
        nodes += 1
        if nodes > NODE_BUDGET:
            return OVERFLOW
        t = x[k] - center[k]
        lk = partial[k + 1] + diag[k] * t * t
        descend = lk <= radius
        if descend and k == 0:
            nonzero = not (above_zero[1] and x[0] == 0)
            if nonzero:
                if n_rec >= MAX_RECORDS:
                    return OVERFLOW
                for i in range(n):
                    recs[n_rec, i] = x[i]
                n_rec += 1
        if descend and k > 0:
            partial[k] = lk
            above_zero[k] = above_zero[k + 1] and x[k] == 0
            k -= 1
            c = 0.0
            for j in range(k + 1, n):
                c -= mu[k, j] * x[j]
            center[k] = c
            x0[k] = np.int64(np.floor(c + 0.5))
            x[k] = x0[k]
            step[k] = 0
            sgn[k] = 1 if c >= x0[k] else -1
            continue
        if not descend:
            k += 1
            if k == n:
                break
        # next candidate at level k, zig-zag around the center
        if above_zero[k + 1]:
            x[k] += 1
        else:
            step[k] += 1
            half = (step[k] + 1) // 2
            if step[k] % 2 == 1:
                x[k] = x0[k] + sgn[k] * half
            else:
                x[k] = x0[k] - sgn[k] * half

    # map to original coordinates, canonical sign, norms
    coeffs = np.zeros((n_rec, n), dtype=np.int64)
    nrm = np.zeros(n_rec)
    for r in range(n_rec):
        for j in range(n):
            s = 0
            for i in range(n):
                s += recs[r, i] * u[i, j]
            coeffs[r, j] = s
        flip = False
        for j in range(n):
            if coeffs[r, j] != 0:
                flip = coeffs[r, j] < 0
                break
        if flip:
            for j in range(n):
                coeffs[r, j] = -coeffs[r, j]
        v = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += g[i, j] * coeffs[r, j]
            v += coeffs[r, i] * acc
        nrm[r] = v

    # insertion sort: ascending norm, ties by descending lexicographic order
    order = np.arange(n_rec)
    for i in range(1, n_rec):
        cur = order[i]
        j = i - 1
        while j >= 0:
            prev = order[j]
            if nrm[cur] < nrm[prev] or (nrm[cur] == nrm[prev] and _lex_greater(coeffs[cur], coeffs[prev])):
                order[j + 1] = prev
                j -= 1
            else:
                break
        order[j + 1] = cur

    xor_basis = np.zeros(n, dtype=np.int64)
    picked = 0
    for idx in range(n_rec):
        r = order[idx]
        mask = 0
        for j in range(n):
            if coeffs[r, j] & 1:
                mask |= 1 << j
        while mask:
            top = 0
            v = mask
            while v > 1:
                v >>= 1
                top += 1
            if xor_basis[top] == 0:
                xor_basis[top] = mask
                break
            mask ^= xor_basis[top]
        if mask:
            for j in range(n):
                out[picked, j] = coeffs[r, j]
            picked += 1
            if picked == n:
                return OK
    return INCOMPLETE


@njit(cache=True)
def select_batch(g, out, status):
    for i in range(g.shape[0]):
        status[i] = select_one(g[i], out[i])


def select_A_stack(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = np.ascontiguousarray(g, dtype=np.float64)
    out = np.zeros(g.shape, dtype=np.int64)
    status = np.zeros(g.shape[0], dtype=np.int64)
    select_batch(g, out, status)
    return out, status
