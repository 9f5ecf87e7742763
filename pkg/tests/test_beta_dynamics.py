from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from betatakagi.beta_dynamics import (
    BetaParam,
    DigitSource,
    GreedyDigits,
    Trilean,
    ball,
    bits_for_depth,
    digits_of,
    is_simple,
    orbit,
    point,
    separation_time,
    synthesize,
    tau,
)
from betatakagi.errors import AmbiguousBranch, DomainError, InadmissibleDigits, InsufficientPrecision

BASES = ["2", "golden", "sqrt2", "tribonacci", "3/2", "1.25", "1.9"]


def binary_digits(q: Fraction, n: int) -> list[int]:
    """Oracle: binary expansion by exact doubling."""
    out = []
    for _ in range(n):
        q *= 2
        d = int(q >= 1)
        out.append(d)
        q -= d
    return out


# -- parsing and contracts ------------------------------------------------------


@pytest.mark.parametrize("bad", ["1", "2.5", "0.9", "-3", "abc"])
def test_beta_out_of_range(bad):
    with pytest.raises(DomainError):
        BetaParam.parse(bad)


def test_precision_floor():
    with pytest.raises(DomainError):
        BetaParam.parse("2", 32)


def test_precision_contract(b2):
    b = BetaParam.parse("2", 128)
    assert b.required_bits(64) == 128
    b.check_precision(64)
    with pytest.raises(InsufficientPrecision) as e:
        orbit(b, point(b, "1/3"), 65)
    assert e.value.exit_code == 4
    assert bits_for_depth("2", 65) == 129


# -- worked examples ------------------------------------------------------------------


def test_tau_examples(b2, golden):
    assert tau(b2, point(b2, "3/4")).contains(Fraction(1, 2))
    assert tau(b2, point(b2, "0")).contains(0)
    g = tau(golden, point(golden, 1))
    f = golden.field
    assert f.sign(f.sub(g.exact, f.inv_beta())) == 0
    assert orbit(golden, point(golden, 1), 1).digits == (1,)


def test_orbit_examples(b2, golden):
    tr = orbit(b2, point(b2, "1/3"), 6)
    assert tr.digits == (0, 1, 0, 1, 0, 1)
    assert [p.exact.to_fraction() for p in tr.points] == [Fraction(1, 3), Fraction(2, 3)] * 3 + [Fraction(1, 3)]
    tr = orbit(golden, point(golden, 1), 4)
    assert tr.digits == (1, 1, 0, 0) and tr.certified
    f = golden.field
    expect = [f.one(), f.inv_beta(), f.zero(), f.zero(), f.zero()]
    assert all(f.sign(f.sub(p.exact, e)) == 0 for p, e in zip(tr.points, expect))
    assert orbit(golden, point(golden, 0), 9).digits == (0,) * 9


def test_synthesize_examples(b2, golden):
    assert synthesize(b2, [0, 1, 0, 1]).exact.to_fraction() == Fraction(5, 16)
    one = synthesize(golden, [1, 1])
    assert golden.field.cmp_int(one.exact, 1) == 0
    assert synthesize(golden, [0, 0, 0]).contains(0)


def test_separation_examples(b2):
    assert separation_time(b2, point(b2, "3/8"), point(b2, "5/16"), 50) == 3
    assert separation_time(b2, point(b2, "1/3"), point(b2, "1/4"), 50) == 4
    x = Fraction(1, 3)
    y = x + Fraction(1, 2**80)
    assert separation_time(b2, point(b2, x), point(b2, y), 60) is None


def test_is_simple_examples(b2, golden):
    s = is_simple(b2, point(b2, "1/2"), 10)
    assert s.answer is Trilean.YES and s.n0 == 1
    s = is_simple(golden, point(golden, 1), 10)
    assert s.answer is Trilean.YES and s.n0 == 2
    assert is_simple(b2, point(b2, "1/3"), 500).answer is Trilean.NO


def test_x_equal_one_at_two(b2):
    d = digits_of(b2, point(b2, 1), 12)
    assert d.digits == (1,) * 12


# -- ball path --------------------------------------------------------------------------


def test_ball_straddling_branch_point_is_ambiguous(b2):
    with pytest.raises(AmbiguousBranch):
        orbit(b2, ball(b2, "1/2", Fraction(1, 2**40)), 3)
    tr = orbit(b2, ball(b2, "1/2", Fraction(1, 2**40)), 3, strict=False)
    assert tr.ambiguous_at == 1 and not tr.certified


@given(st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100), max_denominator=10**6))
def test_radius_law(q):
    base = BetaParam.parse("3/2", 256)
    r0 = Fraction(1, 2**120)
    try:
        tr = orbit(base, ball(base, q, r0), 60)
    except AmbiguousBranch:
        return
    r_in = Fraction(*tr.points[0].radius.as_integer_ratio())
    for k, p in enumerate(tr.points):
        # growth by beta per step; radii are stored rounded up at 64 bits
        slack = r_in * Fraction(3, 2) ** k * k * Fraction(1, 2**60) + (k + 1) * Fraction(1, 2**240)
        assert Fraction(*p.radius.as_integer_ratio()) <= r_in * Fraction(3, 2) ** k + slack
        assert p.lower() >= 0 and p.upper() <= 1


# -- properties -------------------------------------------------------------------------

rationals = st.fractions(min_value=0, max_value=1, max_denominator=10**9)


@pytest.mark.parametrize("label", BASES)
@given(q=rationals)
def test_roundtrip_identity(label, q):
    """x = sum_{k<=n} g_k beta^-k + tau^n(x) beta^-n, exactly."""
    base = BetaParam.parse(label, 512)
    f = base.field
    n = 40
    x = point(base, q)
    tr = orbit(base, x, n)
    s = synthesize(base, tr.digits).exact
    p = f.one()
    for _ in range(n):
        p = f.div_beta(p)
    rhs = f.add(s, f.mul(tr.points[-1].exact, p))
    assert f.sign(f.sub(rhs, x.exact)) == 0


@pytest.mark.parametrize("label", BASES)
@given(q=rationals)
def test_greedy_truncations_regenerate(label, q):
    base = BetaParam.parse(label, 512)
    d = digits_of(base, point(base, q), 30)
    back = digits_of(base, synthesize(base, d), 30)
    assert back.digits == d.digits
    assert GreedyDigits.from_user(base, d.digits).source is DigitSource.USER


@pytest.mark.parametrize("label", BASES)
@given(a=rationals, b=rationals)
def test_separation_monotonicity(label, a, b):
    base = BetaParam.parse(label, 512)
    if a == b:
        return
    x, y = (a, b) if a < b else (b, a)
    N = separation_time(base, point(base, x), point(base, y), 200)
    if N is None:
        return
    assert digits_of(base, point(base, x), N).digits[N - 1] == 0
    assert digits_of(base, point(base, y), N).digits[N - 1] == 1


def test_binary_cross_check():
    b = BetaParam.parse("2", 256)
    import numpy as np

    gen = np.random.default_rng(12345)
    checked = 0
    while checked < 1000:
        den = int(gen.integers(3, 10**6))
        if den & (den - 1) == 0:
            continue
        q = Fraction(int(gen.integers(1, den)), den)
        if q.denominator & (q.denominator - 1) == 0:
            continue
        assert list(digits_of(b, point(b, q), 100).digits) == binary_digits(q, 100)
        checked += 1


def test_inadmissible_user_digits(golden):
    # "11" cannot appear inside a greedy golden-ratio expansion of a point below 1
    with pytest.raises(InadmissibleDigits):
        GreedyDigits.from_user(golden, [0, 1, 1])
    with pytest.raises(InadmissibleDigits):
        GreedyDigits.from_user(golden, [1, 2])


def test_point_outside_unit_interval(b2):
    with pytest.raises(DomainError):
        point(b2, "3/2")
