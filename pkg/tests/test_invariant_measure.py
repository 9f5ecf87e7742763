from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from betatakagi.beta_dynamics import BetaParam, point
from betatakagi.errors import DomainError
from betatakagi.invariant_measure import (
    build_density,
    density_csv,
    density_eval,
    digit_frequency,
    interval_measure,
    measure_upper_bound,
    parry_constants,
    preimage,
)

mpmath.mp.dps = 60
PHI = (1 + mpmath.sqrt(5)) / 2


def within(enc, ref, tol):
    return abs(mpmath.mpf(str(enc.value)) - mpmath.mpf(ref)) <= tol


def fraction_parry(beta: Fraction, K: int):
    """Oracle: truncated F and M from the exact rational orbit of 1."""
    t = Fraction(1)
    F = M = Fraction(0)
    for n in range(K + 1):
        w = beta ** -n
        F += t * w
        M += max(Fraction(0), t - 1 / beta) * w
        t = beta * t - int(beta * t) if t != 1 or beta != 2 else Fraction(0)
        if t == 0:
            break
    return F, M / F


def test_beta_two_is_lebesgue(b2, d2):
    assert d2.F.contains(1) and d2.M.contains(Fraction(1, 2))
    assert d2.orbit_terminates and d2.tail_bound == 0
    for x in ("0", "1/7", "0.5", "1"):
        assert density_eval(d2, x).contains(1)
    assert interval_measure(d2, "1/4", "3/4").contains(Fraction(1, 2))


def test_golden_closed_forms(golden, dgolden):
    assert within(dgolden.F, 1 + 1 / PHI**2, mpmath.mpf(10) ** -50)
    assert within(dgolden.M, 1 / (1 + PHI**2), mpmath.mpf(10) ** -50)
    assert abs(float(dgolden.F.value) - 1.3819660113) < 1e-10
    assert abs(float(dgolden.M.value) - 0.2763932023) < 1e-10
    assert within(density_eval(dgolden, "0.9"), 1 / (1 + 1 / PHI**2), mpmath.mpf(10) ** -50)
    assert within(density_eval(dgolden, "0.3"), (1 + 1 / PHI) / (1 + 1 / PHI**2), mpmath.mpf(10) ** -50)
    m = interval_measure(dgolden, golden.to_enclosure(golden.field.inv_beta()), point(golden, 1))
    assert m.overlaps(dgolden.M)


@pytest.mark.parametrize("beta", ["3/2", "5/4", "7/4", "1.9"])
def test_rational_base_against_fraction_oracle(beta):
    base = BetaParam.parse(beta, 512)
    F, M, K, term = parry_constants(base)
    q = Fraction(beta)
    Fo, Mo = fraction_parry(q, K)
    tail = float(q ** -(K + 1) / (1 - 1 / q))
    assert abs(float(F.value) - float(Fo)) <= float(F.radius) + tail + 1e-30
    assert abs(float(M.value) - float(Mo)) <= float(M.radius) + 4 * tail + 1e-30
    assert abs(float(digit_frequency(base).value) - float(M.value)) < 1e-60


@pytest.mark.parametrize("beta", ["golden", "sqrt2", "tribonacci", "plastic", "3/2", "1.1", "1.999"])
def test_structural_bounds(beta):
    base = BetaParam.parse(beta, 256)
    D = build_density(base)
    inv = 1 / (1 - base.inv_beta)
    assert D.F.lower() >= 1 - 1e-60 and D.F.upper() <= inv.upper()
    assert 0 < D.M.lower() and D.M.upper() < 1
    assert interval_measure(D, "0", "1").contains(1)
    assert density_eval(D, point(base, Fraction(1, 10**9))).lower() * D.F.lower() >= 1 - 1e-60
    assert interval_measure(D, base.to_enclosure(base.field.inv_beta()), point(base, 1)).overlaps(D.M)


def _measure_of_preimage(D, a, b):
    total = None
    for lo, hi in preimage(D.base, a, b):
        m = interval_measure(D, lo, hi)
        total = m if total is None else total + m
    return total


@pytest.mark.parametrize("beta", ["golden", "3/2", "1.3", "sqrt2"])
def test_invariance_random_intervals(beta):
    base = BetaParam.parse(beta, 256)
    D = build_density(base)
    gen = np.random.default_rng(7)
    for _ in range(20):
        a, b = sorted(Fraction(int(v), 2**30) for v in gen.integers(0, 2**30, 2))
        m = interval_measure(D, point(base, a), point(base, b))
        assert _measure_of_preimage(D, a, b).overlaps(m)
        assert m.upper() <= measure_upper_bound(D, point(base, a), point(base, b)).upper()


@given(st.integers(min_value=1, max_value=99))
def test_normalization_on_a_grid(j):
    base = BetaParam.parse(Fraction(100 + j, 100), 512)
    D = build_density(base, 200)
    assert interval_measure(D, "0", "1").contains(1)


def test_domain_errors(d2):
    with pytest.raises(DomainError):
        interval_measure(d2, "3/4", "1/4")
    with pytest.raises(DomainError):
        density_eval(d2, "3/2")


def test_density_csv(dgolden):
    text = density_csv(dgolden).splitlines()
    assert text[0].startswith("# beta=golden")
    assert text[1] == "breakpoint_lo,breakpoint_hi,level,level_radius"
    assert len(text) == 2 + dgolden.n_cells
