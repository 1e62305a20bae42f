"""Compiled lattice-point enumeration kernels.

All kernels walk the Fincke-Pohst box of ``Q(x) = x^T A x / 2`` from the last
coordinate to the first.  Floating point Cholesky data is only used to prune;
every norm that is recorded is recomputed in exact 64-bit integer arithmetic,
and the pruning intervals are widened by a small slack so no vector is lost.
"""

import math

import numpy as np
from numba import njit

_REL_SLACK = 1e-9


def float_cholesky(gram):
    """Return (qdiag, qoff) with Q(x) = sum_i qdiag[i] (x_i + sum_{j>i} qoff[i,j] x_j)^2."""
    s = np.asarray(gram, dtype=np.float64) / 2.0
    r = s.shape[0]
    q = s.copy()
    for i in range(r):
        for j in range(i + 1, r):
            q[j, i] = q[i, j]
            q[i, j] = q[i, j] / q[i, i]
        for k in range(i + 1, r):
            for l in range(k, r):
                q[k, l] -= q[k, i] * q[i, l]
    qdiag = np.array([q[i, i] for i in range(r)])
    qoff = np.zeros((r, r))
    for i in range(r):
        for j in range(i + 1, r):
            qoff[i, j] = q[i, j]
    return qdiag, qoff


def _prepare(gram, bound):
    a = np.ascontiguousarray(np.asarray(gram, dtype=np.int64))
    qdiag, qoff = float_cholesky(a)
    if np.any(qdiag <= 0):
        raise ValueError("form is not positive definite")
    slack = _REL_SLACK * max(float(bound), 1.0) + 1e-6
    return a, qdiag, qoff, slack


@njit(cache=True)
def _level_range(k, x, qdiag, qoff, t, slack):
    r = x.shape[0]
    c = 0.0
    for j in range(k + 1, r):
        c -= qoff[k, j] * x[j]
    if t < 0.0:
        t = 0.0
    h = math.sqrt((t + slack) / qdiag[k])
    return c, math.ceil(c - h), math.floor(c + h)


@njit(cache=True)
def _theta_kernel(a, qdiag, qoff, bound, slack, out):
    r = a.shape[0]
    x = np.zeros(r, dtype=np.int64)
    hi = np.zeros(r, dtype=np.int64)
    ctr = np.zeros(r)
    budget = np.zeros(r + 1)
    part = np.zeros(r + 1, dtype=np.int64)
    budget[r] = float(bound)
    k = r - 1
    c, lo, h = _level_range(k, x, qdiag, qoff, budget[r], slack)
    ctr[k] = c
    x[k] = lo
    hi[k] = h
    while True:
        if k == 0:
            lin = 0
            for j in range(1, r):
                lin += a[0, j] * x[j]
            half = a[0, 0] // 2
            base = part[1]
            for x0 in range(x[0], hi[0] + 1):
                v = base + x0 * (half * x0 + lin)
                if v <= bound:
                    out[v] += 1
            k = 1
            if k == r:
                return
            x[k] += 1
            continue
        if x[k] > hi[k]:
            k += 1
            if k == r:
                return
            x[k] += 1
            continue
        d = x[k] - ctr[k]
        budget[k] = budget[k + 1] - qdiag[k] * d * d
        lin = 0
        for j in range(k + 1, r):
            lin += a[k, j] * x[j]
        part[k] = part[k + 1] + x[k] * ((a[k, k] // 2) * x[k] + lin)
        k -= 1
        c, lo, h = _level_range(k, x, qdiag, qoff, budget[k + 1], slack)
        ctr[k] = c
        x[k] = lo
        hi[k] = h


@njit(cache=True)
def _collect_kernel(a, qdiag, qoff, lo_norm, bound, slack, count_only, vecs, norms):
    r = a.shape[0]
    x = np.zeros(r, dtype=np.int64)
    hi = np.zeros(r, dtype=np.int64)
    ctr = np.zeros(r)
    budget = np.zeros(r + 1)
    part = np.zeros(r + 1, dtype=np.int64)
    budget[r] = float(bound)
    n_found = 0
    k = r - 1
    c, lo, h = _level_range(k, x, qdiag, qoff, budget[r], slack)
    ctr[k] = c
    x[k] = lo
    hi[k] = h
    while True:
        if k == 0:
            lin = 0
            for j in range(1, r):
                lin += a[0, j] * x[j]
            half = a[0, 0] // 2
            base = part[1]
            for x0 in range(x[0], hi[0] + 1):
                v = base + x0 * (half * x0 + lin)
                if v <= bound and v >= lo_norm:
                    if not count_only:
                        vecs[n_found, 0] = x0
                        for j in range(1, r):
                            vecs[n_found, j] = x[j]
                        norms[n_found] = v
                    n_found += 1
            k = 1
            if k == r:
                return n_found
            x[k] += 1
            continue
        if x[k] > hi[k]:
            k += 1
            if k == r:
                return n_found
            x[k] += 1
            continue
        d = x[k] - ctr[k]
        budget[k] = budget[k + 1] - qdiag[k] * d * d
        lin = 0
        for j in range(k + 1, r):
            lin += a[k, j] * x[j]
        part[k] = part[k + 1] + x[k] * ((a[k, k] // 2) * x[k] + lin)
        k -= 1
        c, lo, h = _level_range(k, x, qdiag, qoff, budget[k + 1], slack)
        ctr[k] = c
        x[k] = lo
        hi[k] = h


@njit(cache=True)
def _isqrt_exact(m):
    """Return s with s*s == m, or -1 when m is not a perfect square."""
    if m < 0:
        return -1
    s = np.int64(math.sqrt(float(m)))
    while s * s > m:
        s -= 1
    while (s + 1) * (s + 1) <= m:
        s += 1
    if s * s == m:
        return s
    return -1


@njit(cache=True)
def _count_norm_kernel(a, qdiag, qoff, n, slack):
    r = a.shape[0]
    half = a[0, 0] // 2
    if r == 1:
        if n % half != 0:
            return 0
        s = _isqrt_exact(n // half)
        if s < 0:
            return 0
        return 1 if s == 0 else 2
    x = np.zeros(r, dtype=np.int64)
    hi = np.zeros(r, dtype=np.int64)
    ctr = np.zeros(r)
    budget = np.zeros(r + 1)
    part = np.zeros(r + 1, dtype=np.int64)
    budget[r] = float(n)
    total = 0
    k = r - 1
    c, lo, h = _level_range(k, x, qdiag, qoff, budget[r], slack)
    ctr[k] = c
    x[k] = lo
    hi[k] = h
    while True:
        if k == 0:
            # solve half*x0^2 + lin*x0 + (part[1] - n) = 0 exactly
            lin = 0
            for j in range(1, r):
                lin += a[0, j] * x[j]
            disc = lin * lin - 4 * half * (part[1] - n)
            s = _isqrt_exact(disc)
            if s >= 0:
                den = 2 * half
                if (-lin + s) % den == 0:
                    total += 1
                if s > 0 and (-lin - s) % den == 0:
                    total += 1
            k = 1
            x[k] += 1
            continue
        if x[k] > hi[k]:
            k += 1
            if k == r:
                return total
            x[k] += 1
            continue
        d = x[k] - ctr[k]
        budget[k] = budget[k + 1] - qdiag[k] * d * d
        lin = 0
        for j in range(k + 1, r):
            lin += a[k, j] * x[j]
        part[k] = part[k + 1] + x[k] * ((a[k, k] // 2) * x[k] + lin)
        k -= 1
        if k == 0:
            ctr[0] = 0.0
            x[0] = 0
            hi[0] = 0
        else:
            c, lo, h = _level_range(k, x, qdiag, qoff, budget[k + 1], slack)
            ctr[k] = c
            x[k] = lo
            hi[k] = h


def theta_counts(gram, bound):
    """Exact representation counts r(0..bound) as an int64 array."""
    bound = int(bound)
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    a, qdiag, qoff, slack = _prepare(gram, bound)
    out = np.zeros(bound + 1, dtype=np.int64)
    _theta_kernel(a, qdiag, qoff, np.int64(bound), slack, out)
    return out


def vectors_up_to(gram, bound, lo_norm=0):
    """All integer vectors with lo_norm <= Q(x) <= bound, with their norms."""
    a, qdiag, qoff, slack = _prepare(gram, bound)
    r = a.shape[0]
    dummy_v = np.zeros((1, r), dtype=np.int64)
    dummy_n = np.zeros(1, dtype=np.int64)
    m = _collect_kernel(a, qdiag, qoff, np.int64(lo_norm), np.int64(bound), slack, True, dummy_v, dummy_n)
    vecs = np.zeros((m, r), dtype=np.int64)
    norms = np.zeros(m, dtype=np.int64)
    _collect_kernel(a, qdiag, qoff, np.int64(lo_norm), np.int64(bound), slack, False, vecs, norms)
    return vecs, norms


def count_norm(gram, n):
    """r_Q(n) for a single n without tabulating smaller norms."""
    n = int(n)
    if n < 0:
        return 0
    if n == 0:
        return 1
    a, qdiag, qoff, slack = _prepare(gram, n)
    return int(_count_norm_kernel(a, qdiag, qoff, np.int64(n), slack))
