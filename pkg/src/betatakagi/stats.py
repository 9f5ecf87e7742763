"""Birkhoff averages of the digit function and the CLT for the indicator of [1/beta, 1].

Two orbit modes are available.  ``certified`` runs exact orbits in Q(beta)
from dyadic starts and is meant for short orbits.  ``fast`` runs float64
orbits with a small additive dither (see :data:`DITHER`) so that long orbits
do not collapse onto the float grid; results in this mode are statistical
estimates and are labeled as such in every report.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats as sps

from .beta_dynamics import BetaParam, iter_orbit, point
from .enclosure import Enclosure
from .errors import DomainError, EmptySample, SampleBudgetExceeded
from .field import QElem
from .invariant_measure import PiecewiseDensity, build_density, interval_measure
from .rng import stream, uniform_bits

TAG_CLT = 2
TAG_BIRKHOFF = 3
TAG_CHI2 = 4

MODES = ("certified", "fast")
# per-step float64 dither; 2^-48 sits a few bits above the rounding noise of a step
DITHER = 2.0 ** -48
MAX_TRIES = 10_000  # rejection-sampling attempts per start
BLOCK = 512  # samples per vectorized block
CHUNK = 4096  # orbit steps per noise draw
MIN_SAMPLES = 100


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


# -- the normal law and goodness of fit ------------------------------------------


def normal_cdf(x):
    """Standard normal CDF via the complementary error function."""
    return 0.5 * special.erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))


def ks_statistic(samples: Sequence[float]) -> float:
    """Kolmogorov-Smirnov distance between the sample and the standard normal law."""
    s = np.sort(np.asarray(samples, dtype=float))
    m = s.size
    if m == 0:
        raise EmptySample("ks_statistic needs at least one sample")
    cdf = normal_cdf(s)
    i = np.arange(1, m + 1)
    d = max(np.max(np.abs(i / m - cdf)), np.max(np.abs((i - 1) / m - cdf)))
    return float(min(max(d, 0.0), 1.0))


# -- sampling from the Parry measure ---------------------------------------------


@dataclass(frozen=True)
class _Sampler:
    """Float tables for rejection sampling against the piecewise density."""

    beta: float
    breakpoints: np.ndarray
    levels: np.ndarray  # normalized, tail included
    envelope: float

    @classmethod
    def of(cls, D: PiecewiseDensity) -> "_Sampler":
        bp, lv = D.float_tables()
        lv = lv + float(D.tail_bound) / float(D.F.lower())
        return cls(float(D.base.beta.value), bp, lv, D.envelope)

    def density(self, x):
        j = np.searchsorted(self.breakpoints, x, side="left")
        j = np.clip(j, 1, self.levels.size)
        return self.levels[j - 1]

    def accept(self, x: float, u: float) -> bool:
        return u * self.envelope <= float(self.density(x))


def _draw_start(smp: _Sampler, gen: np.random.Generator) -> float:
    for _ in range(MAX_TRIES):
        x, u = gen.random(2)
        if smp.accept(x, u):
            return float(x)
    raise SampleBudgetExceeded(f"no start accepted in {MAX_TRIES} draws")


def _draw_exact_start(base: BetaParam, smp: _Sampler, gen: np.random.Generator, bits: int) -> Fraction:
    for _ in range(MAX_TRIES):
        k = uniform_bits(gen, bits)
        x = Fraction(k, 1 << bits)
        if smp.accept(float(x), gen.random()):
            return x
    raise SampleBudgetExceeded(f"no start accepted in {MAX_TRIES} draws")


def sample_starts(D: PiecewiseDensity, m: int, seed: int) -> np.ndarray:
    """``m`` float starts drawn from the Parry measure, one stream per sample."""
    smp = _Sampler.of(D)
    return np.array([_draw_start(smp, stream(seed, i, TAG_CHI2)) for i in range(m)])


@dataclass(frozen=True)
class ChiSquare:
    statistic: float
    dof: int
    p_value: float
    cells: int


def sampling_chi_square(D: PiecewiseDensity, m: int, seed: int, min_expected: float = 5.0) -> ChiSquare:
    """Chi-square test of rejection-sampled starts against the density's own cells.

    Adjacent cells are merged until each has at least ``min_expected`` expected hits.
    """
    xs = sample_starts(D, m, seed)
    bp = D.float_tables()[0]
    counts = np.bincount(np.clip(np.searchsorted(bp, xs, side="left"), 1, D.n_cells) - 1, minlength=D.n_cells)
    probs = [float(interval_measure(D, D.breakpoints[j], D.breakpoints[j + 1]).value) for j in range(D.n_cells)]
    obs, exp = [], []
    co, ce = 0, 0.0
    for c, p in zip(counts, probs):
        co += int(c)
        ce += p * m
        if ce >= min_expected:
            obs.append(co)
            exp.append(ce)
            co, ce = 0, 0.0
    if ce > 0 or co:
        if exp:
            obs[-1] += co
            exp[-1] += ce
        else:
            obs, exp = [co], [ce]
    obs_a, exp_a = np.array(obs, dtype=float), np.array(exp)
    exp_a *= obs_a.sum() / exp_a.sum()
    stat = float(np.sum((obs_a - exp_a) ** 2 / exp_a))
    dof = max(len(obs) - 1, 1)
    return ChiSquare(stat, dof, float(sps.chi2.sf(stat, dof)), len(obs))


# -- orbits -------------------------------------------------------------------------


def _fast_counts(beta: float, x0: np.ndarray, n: int, gens: Sequence[np.random.Generator]) -> np.ndarray:
    """Number of digit-1 steps among the first ``n`` for each start (vectorized)."""
    x = np.array(x0, dtype=float)
    total = np.zeros(x.size, dtype=np.int64)
    done = 0
    while done < n:
        t = min(CHUNK, n - done)
        noise = (np.stack([g.random(t) for g in gens]) - 0.5) * DITHER
        for k in range(t):
            y = beta * x
            d = y >= 1.0
            total += d
            x = y - d
            x = np.abs(x + noise[:, k])
            x = np.where(x >= 1.0, 2.0 - x, x)
        done += t
    return total


def _exact_count(base: BetaParam, x, n: int) -> int:
    base.check_precision(n, "certified orbit")
    c = 0
    for k, (d, s) in enumerate(iter_orbit(base, point(base, x)), 1):
        c += d
        if k >= n:
            break
        if isinstance(s, QElem) and not any(s.c):
            break
    return c


# -- Birkhoff averages ---------------------------------------------------------------


@dataclass(frozen=True)
class BirkhoffEstimate:
    """Average of the first ``n`` digits from one start."""

    n: int
    mode: str
    x0: object  # Fraction in certified mode, float in fast mode
    count: int

    @property
    def value(self) -> float:
        return self.count / self.n

    def exact(self) -> Fraction:
        return Fraction(self.count, self.n)


def birkhoff_average(
    base: BetaParam, n: int, x=None, seed: Optional[int] = None, mode: str = "certified", index: int = 0
) -> BirkhoffEstimate:
    """``(1/n) sum_{i=1}^n g_i(x)``; with ``x=None`` a Lebesgue-uniform start is drawn from ``seed``."""
    _check_mode(mode)
    if n < 1:
        raise DomainError("n must be >= 1")
    if x is None and seed is None:
        raise DomainError("give a start x or a seed")
    gen = stream(seed or 0, index, TAG_BIRKHOFF)
    if mode == "certified":
        if x is None:
            bits = base.required_bits(n)
            x = Fraction(uniform_bits(gen, bits), 1 << bits)
        x = Fraction(x)
        return BirkhoffEstimate(n, mode, x, _exact_count(base, x, n))
    x0 = float(Fraction(x)) if x is not None else float(gen.random())
    c = int(_fast_counts(float(base.beta.value), np.array([x0]), n, [gen])[0])
    return BirkhoffEstimate(n, mode, x0, c)


@dataclass(frozen=True)
class BirkhoffPool:
    n: int
    mode: str
    averages: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.mean(self.averages))

    @property
    def stderr(self) -> float:
        a = self.averages
        return float(np.std(a, ddof=1) / math.sqrt(a.size)) if a.size > 1 else float("nan")


def birkhoff_pool(base: BetaParam, n: int, starts: int, seed: int, mode: str = "fast") -> BirkhoffPool:
    """Birkhoff averages from ``starts`` seeded uniform starts, pooled."""
    _check_mode(mode)
    if mode == "certified":
        avgs = [birkhoff_average(base, n, seed=seed, mode=mode, index=i).value for i in range(starts)]
        return BirkhoffPool(n, mode, np.array(avgs))
    gens = [stream(seed, i, TAG_BIRKHOFF) for i in range(starts)]
    x0 = np.array([g.random() for g in gens])
    c = _fast_counts(float(base.beta.value), x0, n, gens)
    return BirkhoffPool(n, mode, c / n)


# -- CLT runs -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CltRun:
    base: BetaParam
    M: Enclosure
    n: int
    m: int
    seed: int
    mode: str
    normalized_sums: np.ndarray  # (S_n - n M) / sqrt(n), not divided by v
    v_hat: float
    ks_distance: float

    @property
    def v_hat_stderr(self) -> float:
        return self.v_hat / math.sqrt(2 * (self.m - 1))

    @property
    def mean(self) -> float:
        return float(np.mean(self.normalized_sums))

    def histogram(self, bins: int = 60, span: float = 6.0) -> list[tuple[float, float, int]]:
        """Counts of ``normalized_sums / v_hat`` on fixed bins over ``[-span, span]``; outliers go to the end bins."""
        z = np.clip(self.normalized_sums / self.v_hat, -span, span)
        edges = np.linspace(-span, span, bins + 1)
        counts, _ = np.histogram(z, bins=edges)
        return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)]


def _clt_block(args) -> np.ndarray:
    smp, n, seed, lo, hi = args
    gens = [stream(seed, i, TAG_CLT) for i in range(lo, hi)]
    x0 = np.array([_draw_start(smp, g) for g in gens])
    return _fast_counts(smp.beta, x0, n, gens)


def _clt_certified(args) -> np.ndarray:
    base, smp, n, seed, lo, hi = args
    bits = base.required_bits(n)
    out = []
    for i in range(lo, hi):
        x = _draw_exact_start(base, smp, stream(seed, i, TAG_CLT), bits)
        out.append(_exact_count(base, x, n))
    return np.array(out, dtype=np.int64)


def clt_run(
    base: BetaParam,
    density_or_m,
    n: int,
    m: int,
    seed: int,
    mode: str = "fast",
    workers: int = 1,
) -> CltRun:
    """Normalized digit sums over ``m`` starts drawn from the Parry measure.

    ``density_or_m`` is a :class:`PiecewiseDensity`, or the frequency M (the
    density is then built from ``base``).  Results do not depend on ``workers``.
    """
    _check_mode(mode)
    if m < MIN_SAMPLES:
        raise DomainError(f"m must be >= {MIN_SAMPLES}")
    if n < 1:
        raise DomainError("n must be >= 1")
    if isinstance(density_or_m, PiecewiseDensity):
        D, M = density_or_m, density_or_m.M
    else:
        D, M = build_density(base), density_or_m
    if mode == "certified":
        base.check_precision(n, "clt_run")
    smp = _Sampler.of(D)
    blocks = [(lo, min(lo + BLOCK, m)) for lo in range(0, m, BLOCK)]
    if mode == "fast":
        jobs, fn = [(smp, n, seed, lo, hi) for lo, hi in blocks], _clt_block
    else:
        jobs, fn = [(base, smp, n, seed, lo, hi) for lo, hi in blocks], _clt_certified
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(fn, jobs))
    else:
        parts = [fn(j) for j in jobs]
    counts = np.concatenate(parts)
    sums = (counts - n * float(M.value)) / math.sqrt(n)
    v_hat = float(np.std(sums, ddof=1))
    if not v_hat > 0:
        raise DomainError("normalized sums have zero spread")
    return CltRun(base, M, n, m, seed, mode, sums, v_hat, ks_statistic(sums / v_hat))


def clt_report(run: CltRun) -> dict:
    return {
        "beta": run.base.label,
        "n": run.n,
        "m": run.m,
        "seed": run.seed,
        "mode": run.mode,
        "M": run.M.to_dict(),
        "mean": run.mean,
        "mean_stderr": run.v_hat / math.sqrt(run.m),
        "v_hat": run.v_hat,
        "v_hat_stderr": run.v_hat_stderr,
        "v_hat_squared": run.v_hat ** 2,
        "ks_distance": run.ks_distance,
        "ks_critical_95": 1.3581 / math.sqrt(run.m),
        "histogram": [list(h) for h in run.histogram()],
    }


def histogram_csv(run: CltRun) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo", "bin_hi", "count"])
    for lo, hi, c in run.histogram():
        w.writerow([repr(lo), repr(hi), c])
    return buf.getvalue()


# -- variance oracle -------------------------------------------------------------------


def _preimages(base: BetaParam, ivs: list[tuple[QElem, QElem]]) -> list[tuple[QElem, QElem]]:
    f = base.field
    out = []
    for a, b in ivs:
        out.append((f.reduce(f.div_beta(a)), f.reduce(f.div_beta(b))))
        lo = f.div_beta(f.add_int(a, 1))
        if f.cmp_int(lo, 1) <= 0:
            hi = f.div_beta(f.add_int(b, 1))
            if f.cmp_int(hi, 1) > 0:
                hi = f.one()
            out.append((f.reduce(lo), f.reduce(hi)))
    return out


def green_kubo(D: PiecewiseDensity, k_max: int) -> tuple[Enclosure, list[Enclosure]]:
    """Truncated ``Var f + 2 sum_{k=1}^{k_max} Cov(f, f o tau^k)`` for ``f = 1_[1/beta, 1]``.

    Correlations are exact interval measures of ``[1/beta, 1] ∩ tau^-k [1/beta, 1]``;
    the number of intervals grows geometrically in ``k``, so keep ``k_max`` small.
    Returns the truncated sum and the list of covariances.
    """
    base = D.base
    f = base.field
    A = (f.inv_beta(), f.one())
    M = D.M
    ivs = [A]
    covs = []
    for _ in range(k_max):
        ivs = _preimages(base, ivs)
        joint = Enclosure.point(0, base.precision_bits)
        for a, b in ivs:
            lo = a if f.sign(f.sub(a, A[0])) >= 0 else A[0]
            if f.sign(f.sub(b, lo)) <= 0:
                continue
            joint = joint + interval_measure(D, base.to_enclosure(lo), base.to_enclosure(b))
        covs.append(joint - M * M)
    total = M * (1 - M)
    for c in covs:
        total = total + 2 * c
    return total, covs
