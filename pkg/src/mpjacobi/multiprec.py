"""Precision tiers and multi-precision scalar/array arithmetic.

Three tiers are supported:

* low   -- simulated binary32, unit roundoff 2**-24.  Simulation rounds every
           scalar operation through binary32 (see ``round_low``), which is
           bit-identical to native binary32 arithmetic but reproducible on any
           platform.
* work  -- native binary64, unit roundoff 2**-53.
* high  -- double-double (an unevaluated sum of two binary64 values), unit
           roundoff about 2**-104.

The error-free transformations ``two_sum`` and ``two_prod`` underpin the high
tier.  ``two_prod`` would use a fused multiply-add where the platform exposes
one; this interpreter does not, so both the scalar and compiled paths use
Dekker splitting and are verified to agree bit-for-bit by the test suite.
"""

from __future__ import annotations

import enum
import math
import warnings

import numpy as np

from . import _kernels

_SPLITTER = 134217729.0  # 2**27 + 1

U_LOW = 2.0 ** -24
U_WORK = 2.0 ** -53
U_HIGH = 2.0 ** -104

_F32_MIN_NORMAL = 2.0 ** -126
_F64_MIN_NORMAL = 2.0 ** -1022


class UnderflowWarning(Warning):
    """A value fell below the normal range of the target format."""


class PrecisionTier(enum.Enum):
    LOW = "low"
    WORK = "work"
    HIGH = "high"

    @property
    def unit_roundoff(self) -> float:
        return _UNIT_ROUNDOFF[self]


_UNIT_ROUNDOFF = {
    PrecisionTier.LOW: U_LOW,
    PrecisionTier.WORK: U_WORK,
    PrecisionTier.HIGH: U_HIGH,
}


def gamma(n: int, tier: PrecisionTier) -> float:
    """n*u / (1 - n*u) for the tier's unit roundoff u."""
    nu = n * tier.unit_roundoff
    if not 0 <= nu < 1:
        raise ValueError(f"n*u = {nu} must lie in [0, 1)")
    return nu / (1.0 - nu)


# ---------------------------------------------------------------------------
# error-free transformations (scalars)
# ---------------------------------------------------------------------------


def two_sum(a: float, b: float) -> tuple[float, float]:
    """Return (s, e) with s = fl(a+b) and s + e = a + b exactly."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def two_prod(a: float, b: float) -> tuple[float, float]:
    """Return (p, e) with p = fl(a*b) and p + e = a*b exactly."""
    if _HAVE_FMA:
        p = a * b
        return p, math.fma(a, b, -p)  # pragma: no cover - needs Python 3.13
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


_HAVE_FMA = hasattr(math, "fma")


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    ahi = c - (c - a)
    return ahi, a - ahi


def _quick_two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    return s, b - (s - a)


# ---------------------------------------------------------------------------
# double-double scalars
# ---------------------------------------------------------------------------


class DDNumber:
    """A double-double value: the unevaluated, normalized sum hi + lo.

    Normalized means hi = fl(hi + lo), so demoting to binary64 is just taking
    hi.  Arithmetic keeps a relative error of a few units in 2**-104.
    """

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        hi = float(hi)
        lo = float(lo)
        if lo != 0.0:
            hi, lo = two_sum(hi, lo)
        self.hi = hi
        self.lo = lo

    @classmethod
    def _raw(cls, hi: float, lo: float) -> "DDNumber":
        out = object.__new__(cls)
        out.hi = hi
        out.lo = lo
        return out

    def __float__(self) -> float:
        return self.hi

    def __repr__(self) -> str:
        return f"DDNumber({self.hi!r}, {self.lo!r})"

    def __eq__(self, other) -> bool:
        other = _as_dd(other)
        return self.hi == other.hi and self.lo == other.lo

    def __lt__(self, other) -> bool:
        other = _as_dd(other)
        return (self.hi, self.lo) < (other.hi, other.lo)

    def __neg__(self) -> "DDNumber":
        return DDNumber._raw(-self.hi, -self.lo)

    def __abs__(self) -> "DDNumber":
        return -self if self.hi < 0.0 else self

    def __add__(self, other) -> "DDNumber":
        return dd_add(self, _as_dd(other))

    __radd__ = __add__

    def __sub__(self, other) -> "DDNumber":
        return dd_sub(self, _as_dd(other))

    def __rsub__(self, other) -> "DDNumber":
        return dd_sub(_as_dd(other), self)

    def __mul__(self, other) -> "DDNumber":
        return dd_mul(self, _as_dd(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DDNumber":
        return dd_div(self, _as_dd(other))

    def __rtruediv__(self, other) -> "DDNumber":
        return dd_div(_as_dd(other), self)

    def sqrt(self) -> "DDNumber":
        if self.hi < 0.0:
            raise ValueError("square root of a negative double-double")
        return DDNumber._raw(*_kernels.dd_sqrt_k(self.hi, self.lo))


def _as_dd(x) -> DDNumber:
    if isinstance(x, DDNumber):
        return x
    return DDNumber(float(x))


def dd_add(a: DDNumber, b: DDNumber) -> DDNumber:
    a, b = _as_dd(a), _as_dd(b)
    return DDNumber._raw(*_kernels.dd_add_k(a.hi, a.lo, b.hi, b.lo))


def dd_sub(a: DDNumber, b: DDNumber) -> DDNumber:
    a, b = _as_dd(a), _as_dd(b)
    return DDNumber._raw(*_kernels.dd_sub_k(a.hi, a.lo, b.hi, b.lo))


def dd_mul(a: DDNumber, b: DDNumber) -> DDNumber:
    a, b = _as_dd(a), _as_dd(b)
    return DDNumber._raw(*_kernels.dd_mul_k(a.hi, a.lo, b.hi, b.lo))


def dd_div(a: DDNumber, b: DDNumber) -> DDNumber:
    a, b = _as_dd(a), _as_dd(b)
    if b.hi == 0.0:
        raise ZeroDivisionError("double-double division by zero")
    return DDNumber._raw(*_kernels.dd_div_k(a.hi, a.lo, b.hi, b.lo))


# ---------------------------------------------------------------------------
# binary32 rounding
# ---------------------------------------------------------------------------


def round_low(x: float) -> float:
    """Round x to the nearest binary32 value, returned as binary64.

    Raises OverflowError if x overflows binary32; warns (UnderflowWarning)
    when a nonzero x falls below the binary32 normal range.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"round_low requires a finite input, got {x!r}")
    with np.errstate(over="ignore"):
        y = float(np.float32(x))
    if math.isinf(y):
        raise OverflowError(f"{x!r} overflows binary32")
    if x != 0.0 and abs(x) < _F32_MIN_NORMAL:
        warnings.warn(
            f"{x!r} is below the binary32 normal range", UnderflowWarning,
            stacklevel=2,
        )
    return y


# ---------------------------------------------------------------------------
# double-double arrays
# ---------------------------------------------------------------------------


def _v_two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _v_quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _v_two_prod(a, b):
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


def _v_dd_add(ah, al, bh, bl):
    sh, se = _v_two_sum(ah, bh)
    th, te = _v_two_sum(al, bl)
    se = se + th
    sh, se = _v_quick_two_sum(sh, se)
    se = se + te
    return _v_quick_two_sum(sh, se)


def _v_dd_mul(ah, al, bh, bl):
    ph, pe = _v_two_prod(ah, bh)
    pe = pe + (ah * bl + al * bh)
    return _v_quick_two_sum(ph, pe)


class DDArray:
    """An array of double-double values stored as parallel hi/lo arrays."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=None):
        hi = np.asarray(hi, dtype=np.float64)
        if lo is None:
            lo = np.zeros_like(hi)
        else:
            lo = np.asarray(lo, dtype=np.float64)
            if lo.shape != hi.shape:
                raise ValueError("hi and lo must have the same shape")
        self.hi = hi
        self.lo = lo

    @classmethod
    def from_float64(cls, a) -> "DDArray":
        a = np.asarray(a, dtype=np.float64)
        return cls(a.copy(), np.zeros_like(a))

    @property
    def shape(self):
        return self.hi.shape

    @property
    def ndim(self):
        return self.hi.ndim

    @property
    def T(self) -> "DDArray":
        return DDArray(self.hi.T, self.lo.T)

    def copy(self) -> "DDArray":
        return DDArray(self.hi.copy(), self.lo.copy())

    def to_float64(self) -> np.ndarray:
        # normalized pairs round to their hi component
        return self.hi.copy()

    def __getitem__(self, idx):
        hi = self.hi[idx]
        if np.ndim(hi) == 0:
            return DDNumber._raw(float(hi), float(self.lo[idx]))
        return DDArray(hi, self.lo[idx])

    def __neg__(self) -> "DDArray":
        return DDArray(-self.hi, -self.lo)

    def __add__(self, other) -> "DDArray":
        oh, ol = _coerce(other)
        return DDArray(*_v_dd_add(self.hi, self.lo, oh, ol))

    __radd__ = __add__

    def __sub__(self, other) -> "DDArray":
        oh, ol = _coerce(other)
        return DDArray(*_v_dd_add(self.hi, self.lo, -oh, -ol))

    def __rsub__(self, other) -> "DDArray":
        oh, ol = _coerce(other)
        return DDArray(*_v_dd_add(oh, ol, -self.hi, -self.lo))

    def __mul__(self, other) -> "DDArray":
        oh, ol = _coerce(other)
        return DDArray(*_v_dd_mul(self.hi, self.lo, oh, ol))

    __rmul__ = __mul__

    def abs(self) -> "DDArray":
        neg = self.hi < 0
        return DDArray(np.where(neg, -self.hi, self.hi),
                       np.where(neg, -self.lo, self.lo))

    def __repr__(self) -> str:
        return f"DDArray(shape={self.hi.shape})"


def _coerce(other):
    if isinstance(other, DDArray):
        return other.hi, other.lo
    if isinstance(other, DDNumber):
        return other.hi, other.lo
    a = np.asarray(other, dtype=np.float64)
    return a, np.zeros_like(a)


# ---------------------------------------------------------------------------
# demotion
# ---------------------------------------------------------------------------


def demote_high_to_work(M: DDArray) -> np.ndarray:
    """Round a double-double matrix to binary64, preserving symmetry exactly.

    Warns (UnderflowWarning) if any nonzero entry lands in the binary64
    subnormal range.
    """
    out = M.to_float64()
    small = (out != 0.0) & (np.abs(out) < _F64_MIN_NORMAL)
    if np.any(small):
        warnings.warn(
            "demotion produced subnormal binary64 entries", UnderflowWarning,
            stacklevel=2,
        )
    if out.ndim == 2 and out.shape[0] == out.shape[1]:
        # dd symmetry is maintained by construction; mirror the lower triangle
        # so the result is bitwise symmetric even if it was not
        out = np.tril(out) + np.tril(out, -1).T
    return out
