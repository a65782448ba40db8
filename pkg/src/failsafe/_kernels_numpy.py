"""Pure-numpy implementations of the hot kernels.

This is the fallback path selected by ``FAILSAFE_BACKEND=numpy``.  Every
function here must produce bit-identical output to its twin in
``_kernels_numba`` -- all arithmetic is exact modular integer arithmetic,
so the two backends can only differ by being wrong.
"""

import numpy as np

from ._modops import addmod, mulmod, submod

NAME = "numpy"


def conv_truncated(a, b, p):
    """Truncated convolution: (a * b) mod x^r with r = len(a) = len(b)."""
    r = a.shape[0]
    out = np.zeros(r, dtype=np.uint64)
    for i in range(r):
        ai = a[i]
        if ai == 0:
            continue
        out[i:] = addmod(out[i:], mulmod(np.uint64(ai), b[: r - i], p), p)
    return out


def conv_batch(a, rows, p):
    """Convolve a single coefficient vector against each row of a 2-D array."""
    m, r = rows.shape
    out = np.zeros((m, r), dtype=np.uint64)
    for i in range(r):
        ai = a[i]
        if ai == 0:
            continue
        out[:, i:] = addmod(out[:, i:], mulmod(np.uint64(ai), rows[:, : r - i], p), p)
    return out


def ntt_batch(data, roots, brev, p):
    """In-place radix-2 transform of each row; length must be a power of two."""
    rows, size = data.shape
    data[:] = data[:, brev]
    half = 1
    while half < size:
        step = size // (2 * half)
        tw = roots[::step][:half]
        blocks = data.reshape(rows, size // (2 * half), 2 * half)
        lo = blocks[:, :, :half]
        hi = blocks[:, :, half:]
        t = mulmod(hi, tw, p)
        u = lo.copy()
        lo[:] = addmod(u, t, p)
        hi[:] = submod(u, t, p)
        half *= 2


def scale_rows(data, c, p):
    """In-place multiply every entry by the scalar c."""
    data[:] = mulmod(data, np.uint64(c), p)


def pointwise_matmul(ah, bh, p):
    """Matrix product with elementwise-mod-p multiply along the last axis.

    ah has shape (n, k, L), bh has shape (k, m, L); the result C satisfies
    C[i, j, t] = sum_k ah[i, k, t] * bh[k, j, t]  (mod p).
    """
    n, kk, size = ah.shape
    m = bh.shape[1]
    out = np.zeros((n, m, size), dtype=np.uint64)
    for k in range(kk):
        prod = mulmod(ah[:, k, None, :], bh[None, k, :, :], p)
        out = addmod(out, prod, p)
    return out


def matmul_schoolbook(a, b, p):
    """Classical triple loop over truncated-polynomial entries."""
    n, kk, r = a.shape
    m = b.shape[1]
    out = np.zeros((n, m, r), dtype=np.uint64)
    for k in range(kk):
        for d in range(r):
            col = a[:, k, d]
            if not col.any():
                continue
            prod = mulmod(col[:, None, None], b[None, k, :, : r - d], p)
            out[:, :, d:] = addmod(out[:, :, d:], prod, p)
    return out


def min_plus(a, b, inf):
    """Distance product C[u, v] = min_z a[u, z] + b[z, v], saturating at inf."""
    n = a.shape[0]
    m = b.shape[1]
    out = np.full((n, m), inf, dtype=np.int64)
    for u in range(n):
        sums = a[u][:, None] + b
        np.minimum(sums.min(axis=0), out[u], out=out[u])
    np.minimum(out, inf, out=out)
    return out


def internal_witness_min(dist, inf):
    """W[u, v] = min over z not in {u, v} of dist[u, z] + dist[z, v]."""
    n = dist.shape[0]
    out = np.full((n, n), inf, dtype=np.int64)
    for u in range(n):
        sums = dist[u][:, None] + dist
        sums[u, :] = inf
        np.fill_diagonal(sums, inf)
        out[u] = sums.min(axis=0)
    np.minimum(out, inf, out=out)
    return out
