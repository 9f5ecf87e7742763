from fractions import Fraction

import mpmath
import pytest
from gmpy2 import mpfr
from hypothesis import given, strategies as st

from betatakagi.enclosure import Enclosure, add_tail, format_mpfr, format_radius, widen

PREC = 128
fracs = st.fractions(min_value=-10, max_value=10, max_denominator=10**6)
pos = st.fractions(min_value=Fraction(1, 1000), max_value=10, max_denominator=10**6)


def enc(q):
    return Enclosure.point(q, PREC)


@given(fracs, fracs)
def test_arithmetic_contains_exact_result(a, b):
    ea, eb = enc(a), enc(b)
    assert (ea + eb).contains(a + b)
    assert (ea - eb).contains(a - b)
    assert (ea * eb).contains(a * b)
    if b:
        assert (ea / eb).contains(a / b)


@given(fracs, fracs, fracs)
def test_chained_operations_stay_sound(a, b, c):
    e = (enc(a) * enc(b) - enc(c)) * enc(a) + enc(b)
    assert e.contains((a * b - c) * a + b)
    assert e.radius >= 0


@given(pos, st.sampled_from([0.5, 0.9, 0.25, 3.0, -0.75]))
def test_log_and_pow_match_mpmath(q, a):
    mpmath.mp.prec = 300
    x = enc(q)
    ref_log = mpmath.log(mpmath.mpf(q.numerator) / q.denominator)
    ref_pow = (mpmath.mpf(q.numerator) / q.denominator) ** mpmath.mpf(a)
    lg, pw = x.log(), x.pow(a)
    assert lg.lower() <= mpfr(str(ref_log), 300) <= lg.upper()
    assert pw.lower() <= mpfr(str(ref_pow), 300) <= pw.upper()


def test_pow_accepts_exact_mpfr_exponent():
    # an exponent needing more than 64 bits must not be rounded
    a = mpfr(Fraction(-(2**100) - 1, 2**100), 128)
    e = Enclosure.point(2, 256).pow(a)
    mpmath.mp.prec = 400
    ref = mpmath.mpf(2) ** (-(mpmath.mpf(2) ** 100 + 1) / mpmath.mpf(2) ** 100)
    assert e.lower() <= mpfr(str(ref), 400) <= e.upper()
    assert e.radius < mpfr(2) ** -200


def test_pow_rejects_nonpositive():
    with pytest.raises(ValueError):
        Enclosure.point(0, PREC).pow(0.5)


def test_comparisons():
    a, b = enc(Fraction(1, 3)), enc(Fraction(1, 2))
    assert a.certainly_lt(b) and b.certainly_gt(a)
    assert not a.overlaps(b)
    assert a.overlaps(a.hull(b))


@given(pos, st.integers(min_value=0, max_value=2**20))
def test_tail_helpers(q, k):
    x = enc(q)
    t = Fraction(k, 2**20)
    tail = mpfr(t, 64)
    y = add_tail(x, tail)
    assert y.contains(q) and y.contains(q + t)
    z = widen(x, tail)
    assert z.contains(q - t) and z.contains(q + t)


@given(st.fractions(min_value=-100, max_value=100, max_denominator=10**9))
def test_format_roundtrip(q):
    v = enc(q).value
    assert mpfr(format_mpfr(v), PREC) == v


def test_format_examples():
    assert format_mpfr(mpfr(0)) == "0"
    assert format_mpfr(mpfr("0.5", 64)) == "5e-1"
    assert format_radius(mpfr(0)) == "0"
