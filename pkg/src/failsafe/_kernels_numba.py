"""Numba-accelerated hot kernels (default backend).

Scalar modular arithmetic is inlined; the 64-bit default prime uses the
same 32-bit-limb reduction as the numpy backend, smaller primes multiply
directly in uint64.  Outputs are bit-identical to ``_kernels_numpy``.
"""

import numpy as np
from numba import njit

from ._modops import GOLDILOCKS_PRIME

NAME = "numba"

_GL = np.uint64(GOLDILOCKS_PRIME)
_EPS = np.uint64(0xFFFFFFFF)
_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_U0 = np.uint64(0)
_U1 = np.uint64(1)


@njit(inline="always")
def _mulmod(a, b, p):
    if p == _GL:
        a_lo = a & _M32
        a_hi = a >> _S32
        b_lo = b & _M32
        b_hi = b >> _S32
        ll = a_lo * b_lo
        lh = a_lo * b_hi
        hl = a_hi * b_lo
        hh = a_hi * b_hi
        cross = lh + hl
        carry = _U1 if cross < lh else _U0
        lo = ll + (cross << _S32)
        carry2 = _U1 if lo < ll else _U0
        hi = hh + (cross >> _S32) + (carry << _S32) + carry2
        n2 = hi & _M32
        n3 = hi >> _S32
        t0 = lo - n3
        if lo < n3:
            t0 -= _EPS
        t1 = (n2 << _S32) - n2
        s = t0 + t1
        if s < t1:
            s += _EPS
        if s >= _GL:
            s -= _GL
        return s
    return (a * b) % p


@njit(inline="always")
def _addmod(a, b, p):
    s = a + b
    if s < a or s >= p:
        s -= p
    return s


@njit(inline="always")
def _submod(a, b, p):
    d = a - b
    if a < b:
        d += p
    return d


@njit(cache=True)
def conv_truncated(a, b, p):
    r = a.shape[0]
    out = np.zeros(r, dtype=np.uint64)
    for i in range(r):
        ai = a[i]
        if ai == _U0:
            continue
        for j in range(r - i):
            bj = b[j]
            if bj == _U0:
                continue
            out[i + j] = _addmod(out[i + j], _mulmod(ai, bj, p), p)
    return out


@njit(cache=True)
def conv_batch(a, rows, p):
    m, r = rows.shape
    out = np.zeros((m, r), dtype=np.uint64)
    for i in range(r):
        ai = a[i]
        if ai == _U0:
            continue
        for k in range(m):
            row = rows[k]
            dst = out[k]
            for j in range(r - i):
                bj = row[j]
                if bj == _U0:
                    continue
                dst[i + j] = _addmod(dst[i + j], _mulmod(ai, bj, p), p)
    return out


@njit(cache=True)
def ntt_batch(data, roots, brev, p):
    rows, size = data.shape
    for q in range(rows):
        row = data[q]
        for i in range(size):
            j = brev[i]
            if i < j:
                row[i], row[j] = row[j], row[i]
        half = 1
        while half < size:
            step = size // (2 * half)
            for base in range(0, size, 2 * half):
                for j in range(half):
                    w = roots[j * step]
                    t = _mulmod(w, row[base + half + j], p)
                    u = row[base + j]
                    row[base + j] = _addmod(u, t, p)
                    row[base + half + j] = _submod(u, t, p)
            half *= 2


@njit(cache=True)
def scale_rows(data, c, p):
    rows, size = data.shape
    for q in range(rows):
        for i in range(size):
            data[q, i] = _mulmod(data[q, i], c, p)


@njit(cache=True)
def pointwise_matmul(ah, bh, p):
    n, kk, size = ah.shape
    m = bh.shape[1]
    out = np.zeros((n, m, size), dtype=np.uint64)
    for i in range(n):
        for k in range(kk):
            arow = ah[i, k]
            for j in range(m):
                brow = bh[k, j]
                dst = out[i, j]
                for t in range(size):
                    dst[t] = _addmod(dst[t], _mulmod(arow[t], brow[t], p), p)
    return out


@njit(cache=True)
def matmul_schoolbook(a, b, p):
    n, kk, r = a.shape
    m = b.shape[1]
    out = np.zeros((n, m, r), dtype=np.uint64)
    for i in range(n):
        for k in range(kk):
            arow = a[i, k]
            for j in range(m):
                brow = b[k, j]
                dst = out[i, j]
                for d in range(r):
                    ad = arow[d]
                    if ad == _U0:
                        continue
                    for e in range(r - d):
                        be = brow[e]
                        if be == _U0:
                            continue
                        dst[d + e] = _addmod(dst[d + e], _mulmod(ad, be, p), p)
    return out


@njit(cache=True)
def min_plus(a, b, inf):
    n, kk = a.shape
    m = b.shape[1]
    out = np.full((n, m), inf, dtype=np.int64)
    for u in range(n):
        for z in range(kk):
            auz = a[u, z]
            if auz >= inf:
                continue
            for v in range(m):
                s = auz + b[z, v]
                if s < out[u, v]:
                    out[u, v] = s
    return out


@njit(cache=True)
def internal_witness_min(dist, inf):
    n = dist.shape[0]
    out = np.full((n, n), inf, dtype=np.int64)
    for u in range(n):
        for z in range(n):
            if z == u:
                continue
            duz = dist[u, z]
            if duz >= inf:
                continue
            for v in range(n):
                if z == v:
                    continue
                s = duz + dist[z, v]
                if s < out[u, v]:
                    out[u, v] = s
    return out
