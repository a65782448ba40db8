"""Vectorized modular arithmetic on uint64 arrays.

Two multiplication routes are supported:

* the 64-bit prime 2^64 - 2^32 + 1, reduced branchlessly from the 128-bit
  product emulated with 32-bit limbs (2^64 = eps and 2^96 = -1 mod p,
  where eps = 2^32 - 1);
* any odd prime below 2^31, where the raw product fits in uint64.

Addition and subtraction are wraparound-compensated and work for every
modulus below 2^64.  All helpers are elementwise and broadcast like the
underlying numpy ufuncs.
"""

import numpy as np

GOLDILOCKS_PRIME = (1 << 64) - (1 << 32) + 1
SMALL_MODULUS_LIMIT = 1 << 31

_GL = np.uint64(GOLDILOCKS_PRIME)
_EPS = np.uint64(0xFFFFFFFF)
_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


def supported_modulus(p: int) -> bool:
    return p == GOLDILOCKS_PRIME or 2 <= p < SMALL_MODULUS_LIMIT


def addmod(a, b, p):
    """(a + b) mod p for a, b already reduced below p < 2^64."""
    p = np.uint64(p)
    s = a + b
    over = (s < a) | (s >= p)
    return np.where(over, s - p, s)


def submod(a, b, p):
    """(a - b) mod p for a, b already reduced below p < 2^64."""
    p = np.uint64(p)
    d = a - b
    return np.where(a < b, d + p, d)


def negmod(a, p):
    p = np.uint64(p)
    return np.where(a == 0, a, p - a)


def _mulmod_goldilocks(a, b):
    a_lo = a & _M32
    a_hi = a >> _S32
    b_lo = b & _M32
    b_hi = b >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    cross = lh + hl
    carry = (cross < lh).astype(np.uint64)
    lo = ll + (cross << _S32)
    carry2 = (lo < ll).astype(np.uint64)
    hi = hh + (cross >> _S32) + (carry << _S32) + carry2
    # 128-bit value is hi*2^64 + lo; fold using 2^64 = eps, 2^96 = -1.
    n2 = hi & _M32
    n3 = hi >> _S32
    t0 = lo - n3 - (lo < n3).astype(np.uint64) * _EPS
    t1 = (n2 << _S32) - n2
    s = t0 + t1
    s = s + (s < t1).astype(np.uint64) * _EPS
    return np.where(s >= _GL, s - _GL, s)


def mulmod(a, b, p):
    """(a * b) mod p elementwise."""
    if p == GOLDILOCKS_PRIME:
        return _mulmod_goldilocks(np.asarray(a, dtype=np.uint64),
                                  np.asarray(b, dtype=np.uint64))
    if p >= SMALL_MODULUS_LIMIT:
        raise ValueError(f"unsupported modulus {p}")
    return (a * b) % np.uint64(p)


def scalar_mulmod(a, c, p):
    """a * c mod p for an array a and a single field element c."""
    return mulmod(a, np.uint64(int(c) % p), p)
