"""Dense matrices over Z_p[x]/<x^r>.

Three multiplication routes with identical results:

* ``matmul_naive`` -- the classical triple loop, kept as the reference
  oracle;
* ``matmul`` -- the fast internal product (single NTT per entry, pointwise
  multiply-accumulate in the transform domain, single inverse NTT per
  output entry) used by inversion and preprocessing;
* ``matmul_degree_aware`` -- shift-bucketed multiplication that groups
  columns by (shifted) column degree, splits high-degree blocks into
  fixed-width slabs, and recombines slab products with monomial offsets.

Inversion mod x^r runs Newton iteration X <- X(2I - FX) with doubling
precision from the inverse of the constant-term matrix; ``invert_gauss``
is the independent Gauss-Jordan oracle over the ring, and ``det_mod_xr``
triangularizes with unit pivots.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import _backend
from ._modops import addmod, submod, mulmod
from .errors import ContractViolationError, DetNotUnitError, NotInvertibleError
from .ring import (
    DEFAULT_MODULUS,
    TruncatedPoly,
    check_modulus,
    ntt_available,
    _next_pow2,
    _ntt_plan,
)

# Use the transform-domain product above this order (heuristic only; both
# routes are exact).
_NTT_MATMUL_MIN_ORDER = 8


class ShiftVector:
    """Per-position integer degree shifts; -inf marks a zero column."""

    __slots__ = ("values",)

    def __init__(self, values):
        vals = []
        for v in values:
            if v == -math.inf:
                vals.append(-math.inf)
            else:
                vals.append(int(v))
        self.values = tuple(vals)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other):
        if isinstance(other, ShiftVector):
            return self.values == other.values
        if isinstance(other, (tuple, list)):
            return self.values == tuple(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.values)

    def __repr__(self):
        return f"ShiftVector({list(self.values)})"

    def is_finite(self) -> bool:
        return all(v != -math.inf for v in self.values)


class PolyMatrix:
    """A rows x cols matrix of truncated polynomials sharing one order."""

    __slots__ = ("data", "order", "modulus")

    def __init__(self, data: np.ndarray, order: int, modulus: int = DEFAULT_MODULUS):
        check_modulus(modulus)
        if data.ndim != 3 or data.shape[2] != order:
            raise ContractViolationError("PolyMatrix data must have shape (rows, cols, order)")
        if data.shape[0] < 1 or data.shape[1] < 1 or order < 1:
            raise ContractViolationError("matrix dimensions and order must be >= 1")
        if data.dtype != np.uint64:
            raise ContractViolationError("coefficient array must be uint64")
        self.data = data
        self.order = order
        self.modulus = modulus

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @classmethod
    def zeros(cls, rows: int, cols: int, order: int, modulus: int = DEFAULT_MODULUS):
        return cls(np.zeros((rows, cols, order), dtype=np.uint64), order, modulus)

    @classmethod
    def identity(cls, n: int, order: int, modulus: int = DEFAULT_MODULUS):
        m = cls.zeros(n, n, order, modulus)
        for i in range(n):
            m.data[i, i, 0] = 1
        return m

    @classmethod
    def from_entries(cls, entries, order: int, modulus: int = DEFAULT_MODULUS):
        """Build from nested sequences of TruncatedPoly, int, or coefficient
        sequences."""
        rows = len(entries)
        cols = len(entries[0])
        m = cls.zeros(rows, cols, order, modulus)
        for i, row in enumerate(entries):
            if len(row) != cols:
                raise ContractViolationError("ragged entry rows")
            for j, e in enumerate(row):
                if isinstance(e, TruncatedPoly):
                    poly = e.truncate(order)
                    if e.modulus != modulus:
                        raise ContractViolationError("mismatched moduli")
                elif isinstance(e, int):
                    poly = TruncatedPoly.constant(e, order, modulus)
                else:
                    poly = TruncatedPoly(e, order, modulus)
                m.data[i, j] = poly.coeffs
        return m

    @classmethod
    def random(cls, rng, rows, cols, order, modulus=DEFAULT_MODULUS, max_degree=None):
        data = rng.integers(0, modulus, size=(rows, cols, order), dtype=np.uint64)
        if max_degree is not None and max_degree < order - 1:
            data[:, :, max_degree + 1 :] = 0
        return cls(data, order, modulus)

    def entry(self, i: int, j: int) -> TruncatedPoly:
        return TruncatedPoly._wrap(self.data[i, j].copy(), self.order, self.modulus)

    def set_entry(self, i: int, j: int, poly: TruncatedPoly):
        if poly.modulus != self.modulus:
            raise ContractViolationError("mismatched moduli")
        self.data[i, j] = poly.truncate(self.order).coeffs

    def truncate(self, order: int) -> "PolyMatrix":
        """Copy reinterpreted mod x^order."""
        out = PolyMatrix.zeros(self.rows, self.cols, order, self.modulus)
        k = min(order, self.order)
        out.data[:, :, :k] = self.data[:, :, :k]
        return out

    def copy(self) -> "PolyMatrix":
        return PolyMatrix(self.data.copy(), self.order, self.modulus)

    def __add__(self, other):
        self._check_same_shape(other)
        return PolyMatrix(addmod(self.data, other.data, self.modulus), self.order, self.modulus)

    def __sub__(self, other):
        self._check_same_shape(other)
        return PolyMatrix(submod(self.data, other.data, self.modulus), self.order, self.modulus)

    def __matmul__(self, other):
        return matmul(self, other)

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return (
            self.order == other.order
            and self.modulus == other.modulus
            and bool(np.array_equal(self.data, other.data))
        )

    def __repr__(self):
        return f"PolyMatrix({self.rows}x{self.cols}, order={self.order})"

    def _check_same_shape(self, other):
        self._check_ring(other)
        if self.data.shape != other.data.shape:
            raise ContractViolationError("mismatched matrix shapes")

    def _check_ring(self, other):
        if not isinstance(other, PolyMatrix):
            raise TypeError(f"expected PolyMatrix, got {type(other).__name__}")
        if self.order != other.order:
            raise ContractViolationError(
                f"mismatched truncation orders {self.order} != {other.order}"
            )
        if self.modulus != other.modulus:
            raise ContractViolationError("mismatched moduli")


def _entry_degrees(data: np.ndarray) -> np.ndarray:
    """Per-entry true degree as float64, -inf for zero entries."""
    r = data.shape[2]
    nz = data != 0
    present = nz.any(axis=2)
    top = r - 1 - np.argmax(nz[:, :, ::-1], axis=2)
    return np.where(present, top.astype(np.float64), -np.inf)


def column_degree(a: PolyMatrix, shift=None) -> ShiftVector:
    """Per-column max of entry degree plus an optional per-row shift.

    Zero columns yield the -inf sentinel, which a max never selects.
    """
    deg = _entry_degrees(a.data)
    if shift is not None:
        if len(shift) != a.rows:
            raise ContractViolationError("shift length must equal the row count")
        svals = np.asarray([float(s) for s in shift])
        if not np.isfinite(svals).all():
            raise ContractViolationError("shift entries must be finite integers")
        deg = deg + svals[:, None]
    col = deg.max(axis=0)
    return ShiftVector([v if v == -math.inf else int(v) for v in col])


def matmul_naive(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    """Reference product: classical triple loop over poly mul/add."""
    a._check_ring(b)
    if a.cols != b.rows:
        raise ContractViolationError(f"dimension mismatch {a.cols} != {b.rows}")
    out = _backend.active().matmul_schoolbook(a.data, b.data, np.uint64(a.modulus))
    return PolyMatrix(out, a.order, a.modulus)


def _matmul_transform(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    r = a.order
    p = a.modulus
    size = _next_pow2(2 * r - 1)
    fwd, inv, brev, size_inv = _ntt_plan(p, size)
    kern = _backend.active()
    pp = np.uint64(p)

    ah = np.zeros((a.rows * a.cols, size), dtype=np.uint64)
    ah[:, :r] = a.data.reshape(-1, r)
    kern.ntt_batch(ah, fwd, brev, pp)
    bh = np.zeros((b.rows * b.cols, size), dtype=np.uint64)
    bh[:, :r] = b.data.reshape(-1, r)
    kern.ntt_batch(bh, fwd, brev, pp)

    ch = kern.pointwise_matmul(
        ah.reshape(a.rows, a.cols, size), bh.reshape(b.rows, b.cols, size), pp
    )
    flat = ch.reshape(-1, size)
    kern.ntt_batch(flat, inv, brev, pp)
    kern.scale_rows(flat, size_inv, pp)
    return PolyMatrix(np.ascontiguousarray(ch[:, :, :r]), r, p)


def matmul(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    """Fast product; equals matmul_naive entrywise."""
    a._check_ring(b)
    if a.cols != b.rows:
        raise ContractViolationError(f"dimension mismatch {a.cols} != {b.rows}")
    if a.order > _NTT_MATMUL_MIN_ORDER and ntt_available(a.modulus, a.order):
        return _matmul_transform(a, b)
    out = _backend.active().matmul_schoolbook(a.data, b.data, np.uint64(a.modulus))
    return PolyMatrix(out, a.order, a.modulus)


def _bucket_index(value: int, xi: Fraction) -> int:
    # bucket 0 holds degrees <= 2*xi; bucket c >= 1 holds (2^c xi, 2^(c+1) xi]
    if value <= 2 * xi:
        return 0
    c = 1
    while value > (1 << (c + 1)) * xi:
        c += 1
    return c


def matmul_degree_aware(a: PolyMatrix, b: PolyMatrix, shift) -> PolyMatrix:
    """Degree-bucketed product; requires shift >= column_degree(a) entrywise.

    Columns of b are grouped by shift-adjusted column degree and columns of
    a by plain column degree, each into geometric ranges scaled by the mean
    degree bound xi.  Every (coarse, fine) group pair is multiplied once
    after splitting the b-block into fixed-width coefficient slabs, and the
    slab products are recombined with the corresponding power-of-x offsets.
    """
    a._check_ring(b)
    if a.cols != b.rows:
        raise ContractViolationError(f"dimension mismatch {a.cols} != {b.rows}")
    if len(shift) != a.cols:
        raise ContractViolationError("shift length must equal a.cols")
    if not all(v != -math.inf and v == int(v) for v in shift):
        raise ContractViolationError("shift entries must be finite integers")
    svals = [int(v) for v in shift]

    cdeg_a = column_degree(a)
    for s, d in zip(svals, cdeg_a):
        if d != -math.inf and s < d:
            raise ContractViolationError("shift must bound the column degrees of a")

    cdeg_b = column_degree(b, svals)

    r = a.order
    p = a.modulus
    mean_s = Fraction(sum(svals), len(svals))
    finite_b = [v for v in cdeg_b if v != -math.inf]
    mean_b = Fraction(sum(finite_b), b.cols) if finite_b else Fraction(0)
    xi = max(mean_s, mean_b) + 1
    if xi < 1:
        xi = Fraction(1)

    a_groups: dict[int, list[int]] = {}
    for j, d in enumerate(cdeg_a):
        c = 0 if d == -math.inf else _bucket_index(int(d), xi)
        a_groups.setdefault(c, []).append(j)
    b_groups: dict[int, list[int]] = {}
    for j, d in enumerate(cdeg_b):
        c = 0 if d == -math.inf else _bucket_index(int(d), xi)
        b_groups.setdefault(c, []).append(j)

    out = np.zeros((a.rows, b.cols, r), dtype=np.uint64)
    for c, bcols in sorted(b_groups.items()):
        for c2, acols in sorted(a_groups.items()):
            if c2 > c:
                # Nonzero entries here would contradict the shift bound;
                # zero a-columns contribute nothing either way.
                continue
            block = b.data[np.ix_(acols, bcols)]
            if not block.any():
                continue
            delta = int(math.ceil((1 << (c2 + 1)) * xi))
            max_deg = int(np.nonzero(block)[2].max())
            slabs = max(1 << (c - c2), (max_deg + delta) // delta)
            pieces = []
            kept = []
            for i in range(slabs):
                lo = i * delta
                if lo > max_deg:
                    break
                piece = np.zeros((len(acols), len(bcols), r), dtype=np.uint64)
                width = min(delta, r - lo)
                piece[:, :, :width] = block[:, :, lo : lo + width]
                if piece.any():
                    pieces.append(piece)
                    kept.append(i)
            if not pieces:
                continue
            bhat = PolyMatrix(
                np.ascontiguousarray(np.concatenate(pieces, axis=1)), r, p
            )
            asub = PolyMatrix(np.ascontiguousarray(a.data[:, acols, :]), r, p)
            prod = matmul(asub, bhat)
            w = len(bcols)
            for slot, i in enumerate(kept):
                off = i * delta
                if off >= r:
                    continue
                part = prod.data[:, slot * w : (slot + 1) * w, : r - off]
                out[:, bcols, off:] = addmod(out[:, bcols, off:], part, p)
    return PolyMatrix(out, r, p)


def _scalar_matrix_inverse(m0: np.ndarray, p: int) -> np.ndarray:
    """Invert a matrix over Z_p by Gauss-Jordan with partial pivoting."""
    n = m0.shape[0]
    aug = np.zeros((n, 2 * n), dtype=np.uint64)
    aug[:, :n] = m0
    for i in range(n):
        aug[i, n + i] = 1
    for col in range(n):
        piv = -1
        for row in range(col, n):
            if aug[row, col] != 0:
                piv = row
                break
        if piv < 0:
            raise NotInvertibleError("constant-term matrix is singular")
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        inv = pow(int(aug[col, col]), p - 2, p)
        aug[col] = mulmod(aug[col], np.uint64(inv), p)
        for row in range(n):
            if row != col and aug[row, col] != 0:
                f = aug[row, col]
                aug[row] = submod(aug[row], mulmod(aug[col], f, p), p)
    return aug[:, n:].copy()


def _require_square(f: PolyMatrix):
    if f.rows != f.cols:
        raise ContractViolationError("square matrix required")


def invert_mod_xr(f: PolyMatrix) -> PolyMatrix:
    """Inverse mod x^r by Newton iteration with doubling precision.

    Requires the constant-term matrix f(0) to be invertible over Z_p
    (equivalently, det f must be a unit of the truncated ring).
    """
    _require_square(f)
    p = f.modulus
    r = f.order
    n = f.rows
    base = _scalar_matrix_inverse(np.ascontiguousarray(f.data[:, :, 0]), p)
    x = PolyMatrix.zeros(n, n, r, p)
    x.data[:, :, 0] = base
    t = 1
    while t < r:
        t = min(2 * t, r)
        ft = f.truncate(t)
        xt = x.truncate(t)
        fx = matmul(ft, xt)
        two_i = PolyMatrix.zeros(n, n, t, p)
        for i in range(n):
            two_i.data[i, i, 0] = 2 % p
        x.data[:, :, :t] = matmul(xt, two_i - fx).data
    return x


def invert_gauss(f: PolyMatrix) -> PolyMatrix:
    """Independent inversion oracle: Gauss-Jordan over Z_p[x]/<x^r>,
    pivoting on entries with a unit constant term."""
    _require_square(f)
    p = f.modulus
    pp = np.uint64(p)
    r = f.order
    n = f.rows
    kern = _backend.active()
    work = np.zeros((n, 2 * n, r), dtype=np.uint64)
    work[:, :n, :] = f.data
    for i in range(n):
        work[i, n + i, 0] = 1
    for col in range(n):
        piv = -1
        for row in range(col, n):
            if work[row, col, 0] != 0:
                piv = row
                break
        if piv < 0:
            raise NotInvertibleError(
                "no pivot with unit constant term; constant-term matrix is singular"
            )
        if piv != col:
            work[[col, piv]] = work[[piv, col]]
        pivot = TruncatedPoly._wrap(work[col, col].copy(), r, p)
        work[col] = kern.conv_batch(pivot.inverse().coeffs, work[col], pp)
        for row in range(n):
            if row != col and work[row, col].any():
                factor = work[row, col].copy()
                work[row] = submod(work[row], kern.conv_batch(factor, work[col], pp), p)
    return PolyMatrix(np.ascontiguousarray(work[:, n:, :]), r, p)


def det_mod_xr(f: PolyMatrix) -> TruncatedPoly:
    """Determinant mod x^r as the signed product of elimination pivots.

    Defined whenever elimination finds unit pivots (always the case for
    matrices of the form I + x*M).  A remaining submatrix that is
    identically zero gives a zero determinant; otherwise the determinant
    has a zero constant term and DetNotUnitError is raised.
    """
    _require_square(f)
    p = f.modulus
    pp = np.uint64(p)
    r = f.order
    n = f.rows
    kern = _backend.active()
    work = f.data.copy()
    sign_flip = False
    pivots = []
    for col in range(n):
        piv = -1
        for row in range(col, n):
            if work[row, col, 0] != 0:
                piv = row
                break
        if piv < 0:
            if not work[col:, col:].any():
                return TruncatedPoly.zero(r, p)
            raise DetNotUnitError("determinant has a zero constant term")
        if piv != col:
            work[[col, piv]] = work[[piv, col]]
            sign_flip = not sign_flip
        pivot = TruncatedPoly._wrap(work[col, col].copy(), r, p)
        pivots.append(pivot)
        if col == n - 1:
            break
        pivot_inv = pivot.inverse().coeffs
        for row in range(col + 1, n):
            if work[row, col].any():
                factor = kern.conv_truncated(work[row, col].copy(), pivot_inv, pp)
                work[row, col:] = submod(
                    work[row, col:], kern.conv_batch(factor, work[col, col:], pp), p
                )
    det = pivots[0]
    for piv in pivots[1:]:
        det = det * piv
    if sign_flip:
        det = -det
    return det
