import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats as sps

from betatakagi.beta_dynamics import BetaParam
from betatakagi.errors import DomainError, EmptySample
from betatakagi.invariant_measure import build_density, digit_frequency
from betatakagi.stats import (
    birkhoff_average,
    birkhoff_pool,
    clt_report,
    clt_run,
    green_kubo,
    histogram_csv,
    ks_statistic,
    normal_cdf,
    sample_starts,
    sampling_chi_square,
)


@given(st.floats(-30, 30))
def test_normal_cdf_matches_mpmath(x):
    assert abs(float(normal_cdf(x)) - float(mpmath.ncdf(x))) < 1e-12


def test_ks_examples():
    m = 400
    q = sps.norm.ppf((np.arange(1, m + 1) - 0.5) / m)
    assert abs(ks_statistic(q) - 1 / (2 * m)) < 1e-12
    assert abs(ks_statistic(np.zeros(10)) - 0.5) < 1e-15
    with pytest.raises(EmptySample):
        ks_statistic([])


@given(st.lists(st.floats(-8, 8), min_size=1, max_size=50))
def test_ks_agrees_with_scipy(xs):
    ref = sps.kstest(xs, "norm").statistic
    assert abs(ks_statistic(xs) - ref) < 1e-12
    assert 0 <= ks_statistic(xs) <= 1


def test_birkhoff_exact_examples(b2):
    for n in (2, 10, 100):
        assert birkhoff_average(b2, n, Fraction(1, 3)).exact() == Fraction(1, 2)
    assert birkhoff_average(b2, 7, Fraction(1, 3)).exact() == Fraction(3, 7)
    assert birkhoff_average(b2, 50, 0).count == 0


def test_birkhoff_requires_start(b2):
    with pytest.raises(DomainError):
        birkhoff_average(b2, 10)
    with pytest.raises(DomainError):
        birkhoff_average(b2, 0, Fraction(1, 3))


def test_birkhoff_counts_binary_ones(b2):
    for k in range(1, 40):
        x = Fraction(2 * k + 1, 128)
        c = birkhoff_average(b2, 7, x, mode="certified").count
        assert c == bin(2 * k + 1).count("1")


@pytest.mark.parametrize("beta", ["2", "golden", "3/2", "tribonacci", "1.3", "sqrt2", "plastic", "7/4", "supergolden", "1.9"])
def test_birkhoff_pool_matches_frequency(beta):
    base = BetaParam.parse(beta, 512)
    M = float(digit_frequency(base).value)
    pool = birkhoff_pool(base, 4000, 200, seed=1)
    assert abs(pool.mean - M) <= 4 * pool.stderr


def test_sampling_chi_square(d2, dgolden):
    for D in (d2, dgolden, build_density(BetaParam.parse("3/2", 512))):
        r = sampling_chi_square(D, 20000, seed=1)
        assert r.p_value > 1e-3
    xs = sample_starts(dgolden, 1000, 9)
    assert np.all((xs >= 0) & (xs < 1))
    assert np.array_equal(xs, sample_starts(dgolden, 1000, 9))


def test_clt_validation(b2, d2):
    with pytest.raises(DomainError):
        clt_run(b2, d2, 100, 99, 1)
    with pytest.raises(DomainError):
        clt_run(b2, d2, 100, 200, 1, mode="exact")


def test_clt_fast_run_beta2(b2, d2):
    run = clt_run(b2, d2, 2000, 2000, seed=4)
    # iid fair digits: variance 1/4
    assert abs(run.v_hat**2 - 0.25) < 4 * 2 * 0.25 * run.v_hat_stderr / run.v_hat
    assert abs(run.mean) < 4 * run.v_hat / math.sqrt(run.m)
    assert run.ks_distance < 1.63 / math.sqrt(run.m)
    rep = clt_report(run)
    assert sum(h[2] for h in rep["histogram"]) == run.m
    assert histogram_csv(run).splitlines()[0] == "bin_lo,bin_hi,count"


def test_clt_workers_and_seed(golden, dgolden):
    a = clt_run(golden, dgolden, 300, 1100, seed=5, workers=1)
    b = clt_run(golden, dgolden, 300, 1100, seed=5, workers=3)
    assert np.array_equal(a.normalized_sums, b.normalized_sums)
    c = clt_run(golden, dgolden, 300, 1100, seed=6)
    assert not np.array_equal(a.normalized_sums, c.normalized_sums)


def test_clt_certified_matches_fast_shape(b2, d2):
    run = clt_run(b2, d2, 200, 100, seed=2, mode="certified")
    counts = run.normalized_sums * math.sqrt(200) + 100
    assert np.allclose(counts, np.round(counts))


def test_green_kubo_beta2(d2):
    total, covs = green_kubo(d2, 6)
    assert total.contains(Fraction(1, 4))
    assert all(c.contains(0) for c in covs)


def test_green_kubo_golden_markov(dgolden, golden):
    total, covs = green_kubo(dgolden, 12)
    M = float(dgolden.M.value)
    p = float(golden.inv_beta.value) ** 2
    # digit 1 is always followed by 0; after 0 a 1 comes with probability p: lag-k covariance M(1-M)(-p)^k
    for k, c in enumerate(covs, 1):
        assert abs(float(c.value) - M * (1 - M) * (-p) ** k) < 1e-15
    v2 = 1 / (5 * math.sqrt(5))
    tail = 2 * M * (1 - M) * p**13 / (1 - p)
    assert abs(float(total.value) - v2) <= tail
