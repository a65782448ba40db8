"""Arithmetic in Z_p and in the truncated power-series ring Z_p[x]/<x^r>.

The default modulus is p = 2^64 - 2^32 + 1.  Its multiplicative group has
2-adicity 32, so radix-2 number-theoretic transforms cover every length
this package ever needs; products of two residues are reduced from the
128-bit result with the identities 2^64 = 2^32 - 1 and 2^96 = -1 (mod p).
Smaller odd primes (below 2^31) are accepted for testing; their products
fit in uint64 directly.

Polynomials are dense uint64 coefficient vectors of length exactly r
(index i holds the coefficient of x^i) and every operation reduces its
result mod x^r.  Multiplication runs schoolbook below the crossover order
and via NTT above it when the modulus has enough roots of unity; the two
paths are exact integer arithmetic and therefore bit-identical.

All values are immutable after construction and all operations are pure,
so everything here is safe to share across threads.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from . import _backend
from ._modops import (
    GOLDILOCKS_PRIME,
    SMALL_MODULUS_LIMIT,
    mulmod,
    addmod,
    submod,
    negmod,
    scalar_mulmod,
    supported_modulus,
)
from .errors import ContractViolationError, NotAUnitError

DEFAULT_MODULUS = GOLDILOCKS_PRIME

# Crossover order between schoolbook and NTT multiplication.  Both paths
# must be (and are) bit-identical; this constant only moves work around.
SCHOOLBOOK_MAX_ORDER = 32

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for every n < 2^64."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=None)
def check_modulus(p: int) -> int:
    """Validate a modulus: prime, and either the default 64-bit prime or
    small enough for direct uint64 products."""
    if not supported_modulus(p):
        raise ValueError(
            f"modulus {p} unsupported: use the default prime 2^64-2^32+1 "
            f"or an odd prime below 2^{SMALL_MODULUS_LIMIT.bit_length() - 1}"
        )
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    return p


class FieldElement:
    """An element of Z_p for a fixed prime modulus."""

    __slots__ = ("value", "modulus")

    def __init__(self, value: int, modulus: int = DEFAULT_MODULUS):
        check_modulus(modulus)
        self.value = int(value) % modulus
        self.modulus = modulus

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise ContractViolationError("mixed moduli in field arithmetic")
            return other
        return FieldElement(other, self.modulus)

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElement(self.value + other.value, self.modulus)

    def __sub__(self, other):
        other = self._coerce(other)
        return FieldElement(self.value - other.value, self.modulus)

    def __mul__(self, other):
        other = self._coerce(other)
        return FieldElement(self.value * other.value, self.modulus)

    def __neg__(self):
        return FieldElement(-self.value, self.modulus)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return FieldElement(pow(self.value, exponent, self.modulus), self.modulus)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise NotAUnitError("0 has no inverse")
        return FieldElement(pow(self.value, self.modulus - 2, self.modulus), self.modulus)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.value == other.value and self.modulus == other.modulus
        if isinstance(other, int):
            return self.value == other % self.modulus
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.modulus))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"FieldElement({self.value})"


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def _two_adicity(p: int) -> int:
    s, m = 0, p - 1
    while m % 2 == 0:
        m //= 2
        s += 1
    return s


def ntt_available(modulus: int, order: int) -> bool:
    """Whether the modulus has enough 2-power roots of unity to convolve
    two length-`order` polynomials exactly."""
    size = _next_pow2(2 * order - 1)
    return (1 << _two_adicity(modulus)) >= size


@lru_cache(maxsize=None)
def _ntt_plan(p: int, size: int):
    """Twiddle tables for a radix-2 transform of the given power-of-2 size."""
    adicity = _two_adicity(p)
    if (1 << adicity) < size:
        raise ValueError(f"modulus {p} has no root of unity of order {size}")
    # Deterministic search for an element of maximal 2-power order.
    for g in range(2, 1 << 20):
        c = pow(g, (p - 1) >> adicity, p)
        if adicity == 0 or pow(c, 1 << (adicity - 1), p) != 1:
            break
    root = pow(c, (1 << adicity) // size, p) if size > 1 else 1
    root_inv = pow(root, p - 2, p)
    half = max(size // 2, 1)
    fwd = np.empty(half, dtype=np.uint64)
    inv = np.empty(half, dtype=np.uint64)
    wf = wi = 1
    for i in range(half):
        fwd[i] = wf
        inv[i] = wi
        wf = wf * root % p
        wi = wi * root_inv % p
    bits = size.bit_length() - 1
    brev = np.zeros(size, dtype=np.int64)
    for i in range(1, size):
        brev[i] = (brev[i >> 1] >> 1) | ((i & 1) << (bits - 1))
    size_inv = pow(size, p - 2, p) if size > 1 else 1
    return fwd, inv, brev, np.uint64(size_inv)


def _conv_ntt(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    r = a.shape[0]
    size = _next_pow2(2 * r - 1)
    fwd, inv, brev, size_inv = _ntt_plan(p, size)
    kern = _backend.active()
    buf = np.zeros((2, size), dtype=np.uint64)
    buf[0, :r] = a
    buf[1, :r] = b
    kern.ntt_batch(buf, fwd, brev, np.uint64(p))
    prod = mulmod(buf[0], buf[1], p).reshape(1, size)
    kern.ntt_batch(prod, inv, brev, np.uint64(p))
    kern.scale_rows(prod, size_inv, np.uint64(p))
    return prod[0, :r].copy()


class TruncatedPoly:
    """A polynomial in Z_p[x]/<x^r>, stored as r dense coefficients."""

    __slots__ = ("coeffs", "order", "modulus")

    def __init__(self, coeffs, order: int, modulus: int = DEFAULT_MODULUS):
        check_modulus(modulus)
        if order < 1:
            raise ContractViolationError("truncation order must be >= 1")
        data = np.zeros(order, dtype=np.uint64)
        if isinstance(coeffs, np.ndarray) and coeffs.dtype == np.uint64 and coeffs.ndim == 1:
            k = min(coeffs.shape[0], order)
            data[:k] = coeffs[:k]
            np.remainder(data, np.uint64(modulus), out=data)
        else:
            for i, c in enumerate(coeffs):
                if i >= order:
                    break
                data[i] = int(c) % modulus
        self.coeffs = data
        self.order = order
        self.modulus = modulus

    @classmethod
    def _wrap(cls, data: np.ndarray, order: int, modulus: int) -> "TruncatedPoly":
        # Internal fast path: data is already a reduced uint64 vector of
        # length `order`.
        self = object.__new__(cls)
        self.coeffs = data
        self.order = order
        self.modulus = modulus
        return self

    @classmethod
    def zero(cls, order: int, modulus: int = DEFAULT_MODULUS):
        return cls((), order, modulus)

    @classmethod
    def one(cls, order: int, modulus: int = DEFAULT_MODULUS):
        return cls((1,), order, modulus)

    @classmethod
    def constant(cls, c: int, order: int, modulus: int = DEFAULT_MODULUS):
        return cls((c,), order, modulus)

    @classmethod
    def x_power(cls, k: int, order: int, modulus: int = DEFAULT_MODULUS):
        """The monomial x^k (zero if k >= order)."""
        poly = cls.zero(order, modulus)
        if 0 <= k < order:
            poly.coeffs[k] = 1
        return poly

    @classmethod
    def random(cls, rng: np.random.Generator, order: int, modulus: int = DEFAULT_MODULUS):
        data = rng.integers(0, modulus, size=order, dtype=np.uint64)
        return cls._wrap(data, order, modulus)

    def _check_compatible(self, other: "TruncatedPoly"):
        if not isinstance(other, TruncatedPoly):
            raise TypeError(f"expected TruncatedPoly, got {type(other).__name__}")
        if self.order != other.order:
            raise ContractViolationError(
                f"mismatched truncation orders {self.order} != {other.order}"
            )
        if self.modulus != other.modulus:
            raise ContractViolationError("mismatched moduli")

    def __add__(self, other):
        self._check_compatible(other)
        return TruncatedPoly._wrap(
            addmod(self.coeffs, other.coeffs, self.modulus), self.order, self.modulus
        )

    def __sub__(self, other):
        self._check_compatible(other)
        return TruncatedPoly._wrap(
            submod(self.coeffs, other.coeffs, self.modulus), self.order, self.modulus
        )

    def __neg__(self):
        return TruncatedPoly._wrap(negmod(self.coeffs, self.modulus), self.order, self.modulus)

    def __mul__(self, other):
        self._check_compatible(other)
        if self.order <= SCHOOLBOOK_MAX_ORDER or not ntt_available(self.modulus, self.order):
            return self.mul_schoolbook(other)
        return self.mul_ntt(other)

    def mul_schoolbook(self, other: "TruncatedPoly") -> "TruncatedPoly":
        self._check_compatible(other)
        out = _backend.active().conv_truncated(
            self.coeffs, other.coeffs, np.uint64(self.modulus)
        )
        return TruncatedPoly._wrap(out, self.order, self.modulus)

    def mul_ntt(self, other: "TruncatedPoly") -> "TruncatedPoly":
        self._check_compatible(other)
        if not ntt_available(self.modulus, self.order):
            raise ValueError(
                f"modulus {self.modulus} lacks roots of unity for order {self.order}"
            )
        out = _conv_ntt(self.coeffs, other.coeffs, self.modulus)
        return TruncatedPoly._wrap(out, self.order, self.modulus)

    def inverse(self) -> "TruncatedPoly":
        """Multiplicative inverse mod x^r by Newton lifting."""
        if self.coeffs[0] == 0:
            raise NotAUnitError("constant term is zero; not a unit mod x^r")
        p = self.modulus
        r = self.order
        kern = _backend.active()
        inv = np.zeros(1, dtype=np.uint64)
        inv[0] = pow(int(self.coeffs[0]), p - 2, p)
        t = 1
        while t < r:
            t = min(2 * t, r)
            a_t = self.coeffs[:t]
            b = np.zeros(t, dtype=np.uint64)
            b[: inv.shape[0]] = inv
            # b <- b * (2 - a*b) mod x^t
            ab = kern.conv_truncated(a_t, b, np.uint64(p))
            two = np.zeros(t, dtype=np.uint64)
            two[0] = 2 % p
            inv = kern.conv_truncated(b, submod(two, ab, p), np.uint64(p))
        return TruncatedPoly._wrap(inv, r, p)

    def shift_up(self, k: int) -> "TruncatedPoly":
        """Multiply by x^k and truncate."""
        if k < 0:
            raise ContractViolationError("negative shift")
        out = np.zeros(self.order, dtype=np.uint64)
        if k < self.order:
            out[k:] = self.coeffs[: self.order - k]
        return TruncatedPoly._wrap(out, self.order, self.modulus)

    def scale(self, c) -> "TruncatedPoly":
        """Multiply every coefficient by the field element c."""
        return TruncatedPoly._wrap(
            scalar_mulmod(self.coeffs, int(c), self.modulus), self.order, self.modulus
        )

    def deg_star(self):
        """Lowest degree with a nonzero coefficient; +inf for the zero poly."""
        nz = np.nonzero(self.coeffs)[0]
        if nz.shape[0] == 0:
            return math.inf
        return int(nz[0])

    def degree(self):
        """Highest degree with a nonzero coefficient; -inf for the zero poly."""
        nz = np.nonzero(self.coeffs)[0]
        if nz.shape[0] == 0:
            return -math.inf
        return int(nz[-1])

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def coeff(self, i: int) -> int:
        return int(self.coeffs[i]) if 0 <= i < self.order else 0

    def truncate(self, order: int) -> "TruncatedPoly":
        """Reinterpret mod x^order (shrinking drops terms, growing pads)."""
        if order == self.order:
            return self
        data = np.zeros(order, dtype=np.uint64)
        k = min(order, self.order)
        data[:k] = self.coeffs[:k]
        return TruncatedPoly._wrap(data, order, self.modulus)

    def __eq__(self, other):
        if not isinstance(other, TruncatedPoly):
            return NotImplemented
        return (
            self.order == other.order
            and self.modulus == other.modulus
            and bool(np.array_equal(self.coeffs, other.coeffs))
        )

    def __hash__(self):
        return hash((self.order, self.modulus, self.coeffs.tobytes()))

    def __repr__(self):
        return f"TruncatedPoly({self.coeffs.tolist()}, order={self.order})"


def poly_add(a: TruncatedPoly, b: TruncatedPoly) -> TruncatedPoly:
    """Coefficient-wise sum mod p, truncated to the common order."""
    return a + b


def poly_sub(a: TruncatedPoly, b: TruncatedPoly) -> TruncatedPoly:
    return a - b


def poly_mul(a: TruncatedPoly, b: TruncatedPoly) -> TruncatedPoly:
    """Product reduced mod x^r (schoolbook or NTT; identical results)."""
    return a * b


def poly_inv(a: TruncatedPoly) -> TruncatedPoly:
    """Inverse mod x^r; requires a unit constant term."""
    return a.inverse()


def deg_star(a: TruncatedPoly):
    """Lowest x-degree appearing in a, or +inf if a = 0 mod x^r."""
    return a.deg_star()
