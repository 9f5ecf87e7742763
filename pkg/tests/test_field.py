from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from betatakagi.beta_dynamics import NAMED_BASES, BetaParam

mpmath.mp.dps = 80
NAMES = sorted(NAMED_BASES)


def mp_root(name):
    """Oracle: the root of the defining polynomial in (1, 2] via mpmath."""
    poly = NAMED_BASES[name]
    roots = mpmath.polyroots(list(reversed(poly)), maxsteps=200, extraprec=200)
    real = [r.real for r in roots if abs(r.imag) < mpmath.mpf(10) ** -60 and 1 < r.real <= 2]
    assert len(real) == 1
    return real[0]


def mp_value(e, b):
    return sum(mpmath.mpf(c) * b**i for i, c in enumerate(e.c)) / e.den


def close(enc, ref, tol=mpmath.mpf(10) ** -60):
    return abs(mpmath.mpf(str(enc.value)) - ref) <= mpmath.mpf(str(enc.radius)) + tol


@pytest.mark.parametrize("name", NAMES)
def test_named_base_matches_polynomial_root(name):
    base = BetaParam.parse(name, 256)
    assert close(base.beta, mp_root(name))
    assert close(base.inv_beta, 1 / mp_root(name))


elems = st.lists(st.integers(-50, 50), min_size=1, max_size=3)


@pytest.mark.parametrize("name", NAMES + ["3/2", "1.7"])
@given(a=elems, b=elems, da=st.integers(1, 30), db=st.integers(1, 30))
def test_field_operations_agree_with_mpmath(name, a, b, da, db):
    base = BetaParam.parse(name, 256)
    f = base.field
    beta = mp_root(name) if name in NAMED_BASES else mpmath.mpf(Fraction(name).numerator) / Fraction(name).denominator

    def elem(cs, d):
        e = f.zero()
        p = f.one()
        for c in cs:
            e = f.add(e, f.mul(f.coerce(Fraction(c, d)), p))
            p = f.mul_beta(p)
        return f.reduce(e)

    x, y = elem(a, da), elem(b, db)
    vx, vy = mp_value(x, beta), mp_value(y, beta)
    for got, ref in [
        (f.add(x, y), vx + vy),
        (f.sub(x, y), vx - vy),
        (f.mul(x, y), vx * vy),
        (f.mul_beta(x), vx * beta),
        (f.div_beta(x), vx / beta),
    ]:
        got = f.reduce(got)
        assert abs(mp_value(got, beta) - ref) < mpmath.mpf(10) ** -50
        assert close(base.to_enclosure(got), ref)
    s = f.sign(f.sub(x, y))
    assert s == (0 if abs(vx - vy) < mpmath.mpf(10) ** -60 else (1 if vx > vy else -1))


@pytest.mark.parametrize("name", NAMES)
def test_inverse_power_bounds(name):
    from betatakagi.invariant_measure import inverse_power

    base = BetaParam.parse(name, 256)
    beta = mp_root(name)
    for n in (1, 7, 64, 300):
        assert close(inverse_power(base, n), beta ** (-n))
