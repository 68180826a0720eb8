"""Error-free transforms, double-double arithmetic, and rounding."""

import math
from fractions import Fraction

import numpy as np
import pytest

from mpjacobi import _kernels
from mpjacobi.multiprec import (
    DDArray,
    DDNumber,
    PrecisionTier,
    U_HIGH,
    U_LOW,
    U_WORK,
    UnderflowWarning,
    dd_add,
    dd_div,
    dd_mul,
    dd_sub,
    demote_high_to_work,
    gamma,
    round_low,
    two_prod,
    two_sum,
)


def random_floats(rng, count, emin=-300, emax=300):
    m = rng.standard_normal(count)
    e = rng.integers(emin, emax, size=count)
    return [float(np.ldexp(mi, int(ei))) for mi, ei in zip(m, e)]


class TestTwoSum:
    def test_tiny_addend_is_preserved(self):
        s, e = two_sum(1.0, 2.0 ** -60)
        assert s == 1.0
        assert e == 2.0 ** -60

    def test_decimal_fractions_reconstruct_exactly(self):
        s, e = two_sum(0.1, 0.2)
        assert s == 0.1 + 0.2
        assert Fraction(s) + Fraction(e) == Fraction(0.1) + Fraction(0.2)

    @pytest.mark.parametrize("x", [1.5, -3.25, 1e300, 2.0 ** -1000])
    def test_zero_identity(self, x):
        assert two_sum(x, 0.0) == (x, 0.0)

    def test_exactness_on_random_pairs(self):
        rng = np.random.default_rng(42)
        for a, b in zip(random_floats(rng, 2000), random_floats(rng, 2000)):
            s, e = two_sum(a, b)
            assert s == a + b
            assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)


class TestTwoProd:
    def test_exact_product(self):
        assert two_prod(2.0, 3.0) == (6.0, 0.0)

    def test_near_one_square(self):
        x = 1.0 + 2.0 ** -30
        p, e = two_prod(x, x)
        assert p == x * x
        assert Fraction(p) + Fraction(e) == Fraction(x) * Fraction(x)
        assert e != 0.0  # the square needs 60 significand bits

    @pytest.mark.parametrize("x", [1.5, -3.25, 0.1, 2.0 ** 500])
    def test_one_identity(self, x):
        assert two_prod(x, 1.0) == (x, 0.0)

    def test_exactness_on_random_pairs(self):
        rng = np.random.default_rng(43)
        for a, b in zip(random_floats(rng, 2000), random_floats(rng, 2000)):
            p, e = two_prod(a, b)
            assert p == a * b
            assert Fraction(p) + Fraction(e) == Fraction(a) * Fraction(b)

    def test_kernel_matches_python_on_fixed_vector(self):
        # the compiled path must agree bit-for-bit with the interpreted one
        rng = np.random.default_rng(7)
        for a, b in zip(random_floats(rng, 256), random_floats(rng, 256)):
            assert _kernels.two_prod_k(a, b) == two_prod(a, b)
            assert _kernels.two_sum_k(a, b) == two_sum(a, b)


class TestDDArithmetic:
    def test_roundtrip_keeps_dropped_bits(self):
        x = dd_add(DDNumber(1.0), DDNumber(2.0 ** -80))
        y = dd_sub(x, DDNumber(1.0))
        assert y.hi == 2.0 ** -80
        assert y.lo == 0.0

    def test_mul_identity(self):
        x = DDNumber(0.1, 1e-18)
        assert dd_mul(x, DDNumber(1.0)) == x

    def test_third_vs_rational(self):
        third = dd_div(DDNumber(1.0), DDNumber(3.0))
        err = abs(Fraction(third.hi) + Fraction(third.lo) - Fraction(1, 3))
        assert err <= Fraction(2, 3) * Fraction(2) ** -104

    def test_div_by_zero_raises(self):
        with pytest.raises(ZeroDivisionError):
            dd_div(DDNumber(1.0), DDNumber(0.0))

    def test_add_sub_roundtrip_100_bits(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            a = DDNumber(float(rng.standard_normal()),
                         float(rng.standard_normal()) * 2.0 ** -55)
            shift = int(rng.integers(-40, 40))
            b = DDNumber(float(np.ldexp(rng.standard_normal(), shift)))
            back = dd_sub(dd_add(a, b), b)
            # recovered to >= 100 significant bits of the larger operand
            err = abs((Fraction(back.hi) + Fraction(back.lo))
                      - (Fraction(a.hi) + Fraction(a.lo)))
            big = max(abs(Fraction(a.hi)), abs(Fraction(b.hi)))
            assert err <= big * Fraction(2) ** -100

    def test_relative_error_random_ops(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            a = DDNumber(float(rng.standard_normal()))
            b = DDNumber(float(rng.standard_normal()) + 2.0)
            for op, exact in (
                (dd_add, Fraction(a.hi) + Fraction(b.hi)),
                (dd_sub, Fraction(a.hi) - Fraction(b.hi)),
                (dd_mul, Fraction(a.hi) * Fraction(b.hi)),
                (dd_div, Fraction(a.hi) / Fraction(b.hi)),
            ):
                r = op(a, b)
                got = Fraction(r.hi) + Fraction(r.lo)
                if exact != 0:
                    assert abs(got - exact) <= abs(exact) * 8 * Fraction(2) ** -104

    def test_sqrt(self):
        r = DDNumber(2.0).sqrt()
        err = abs((Fraction(r.hi) + Fraction(r.lo)) ** 2 - 2)
        assert err <= 8 * Fraction(2) ** -104

    def test_operator_sugar(self):
        x = DDNumber(1.0)
        y = (x + 2.0 ** -70) - 1.0
        assert y.hi == 2.0 ** -70


class TestRoundLow:
    def test_below_half_ulp_rounds_away(self):
        assert round_low(1.0 + 2.0 ** -30) == 1.0

    def test_representable_passes_through(self):
        assert round_low(1.0 + 2.0 ** -23) == 1.0 + 2.0 ** -23

    def test_subnormal_warns(self):
        with pytest.warns(UnderflowWarning):
            y = round_low(2.0 ** -140)
        assert y == float(np.float32(2.0 ** -140))

    def test_overflow_raises(self):
        with pytest.raises(OverflowError):
            round_low(1e39)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            round_low(float("inf"))

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        for x in random_floats(rng, 500, emin=-120, emax=120):
            y = round_low(x)
            assert round_low(y) == y


class TestTiers:
    def test_unit_roundoffs_decrease(self):
        assert PrecisionTier.LOW.unit_roundoff == U_LOW == 2.0 ** -24
        assert PrecisionTier.WORK.unit_roundoff == U_WORK == 2.0 ** -53
        assert PrecisionTier.HIGH.unit_roundoff == U_HIGH == 2.0 ** -104
        assert U_HIGH < U_WORK < U_LOW

    def test_gamma_ordering(self):
        for n in (1, 2, 10, 100, 1000, 10 ** 6):
            assert gamma(n, PrecisionTier.HIGH) < gamma(n, PrecisionTier.WORK)

    def test_gamma_value(self):
        n = 100
        nu = n * U_WORK
        assert gamma(n, PrecisionTier.WORK) == nu / (1 - nu)


class TestDemote:
    def test_representable_matrix_is_copied(self):
        A = np.array([[1.0, 0.5], [0.5, 2.0]])
        M = DDArray.from_float64(A)
        out = demote_high_to_work(M)
        assert np.array_equal(out, A)

    def test_low_part_is_dropped(self):
        M = DDArray(np.array([[1.0]]), np.array([[2.0 ** -60]]))
        assert demote_high_to_work(M)[0, 0] == 1.0

    def test_relative_change_below_u(self):
        rng = np.random.default_rng(9)
        hi = rng.standard_normal((8, 8))
        hi = (hi + hi.T) / 2
        lo = hi * (2.0 ** -55) * rng.standard_normal((8, 8))
        M = DDArray(*_normalize(hi, lo))
        out = demote_high_to_work(M)
        rel = np.abs(out - (M.hi + M.lo)) / np.abs(M.hi + M.lo)
        assert np.max(rel) <= 2.0 ** -53

    def test_symmetry_preserved(self):
        rng = np.random.default_rng(10)
        hi = rng.standard_normal((6, 6))
        hi = (hi + hi.T) / 2
        out = demote_high_to_work(DDArray.from_float64(hi))
        assert np.array_equal(out, out.T)

    def test_underflow_warns(self):
        M = DDArray(np.array([[1.0, 2.0 ** -1060], [2.0 ** -1060, 1.0]]))
        with pytest.warns(UnderflowWarning):
            demote_high_to_work(M)


def _normalize(hi, lo):
    s = hi + lo
    e = lo - (s - hi)
    return s, e


class TestDDArray:
    def test_vector_ops_match_scalar(self):
        rng = np.random.default_rng(21)
        a_hi = rng.standard_normal(64)
        a_lo = a_hi * 2.0 ** -55 * rng.standard_normal(64)
        b_hi = rng.standard_normal(64) + 3.0
        A = DDArray(*_normalize(a_hi, a_lo))
        B = DDArray(b_hi)
        for op, scalar_op in ((A + B, dd_add), (A - B, dd_sub), (A * B, dd_mul)):
            for i in range(64):
                want = scalar_op(DDNumber._raw(A.hi[i], A.lo[i]),
                                 DDNumber._raw(B.hi[i], B.lo[i]))
                assert op.hi[i] == want.hi
                assert op.lo[i] == want.lo

    def test_to_float64_is_demotion(self):
        A = DDArray(np.array([1.0, 2.0]), np.array([2.0 ** -60, 0.0]))
        assert np.array_equal(A.to_float64(), np.array([1.0, 2.0]))

    def test_indexing(self):
        A = DDArray(np.array([[1.0, 2.0], [3.0, 4.0]]))
        x = A[0, 1]
        assert isinstance(x, DDNumber)
        assert x.hi == 2.0
