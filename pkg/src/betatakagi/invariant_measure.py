"""The Parry invariant density of the beta-map and measures of intervals.

The unnormalized density is ``h(x) = sum_n beta^-n 1[x <= tau^n(1)]``.  It is
piecewise constant with breakpoints at the orbit of 1, so everything is
computed from that orbit: the normalizer ``F = integral of h`` and the digit
frequency ``M = m([1/beta, 1])``.  Sums are truncated at depth ``K``; the
neglected terms are nonnegative and at most ``beta^-(K+1) / (1 - 1/beta)`` in
total, which is folded into every returned enclosure.
"""
from __future__ import annotations

import bisect
import csv
import functools
import io
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from gmpy2 import mpfr

from .beta_dynamics import BetaParam, exact_state, iter_orbit, point
from .enclosure import Enclosure, add_tail, ctx_up, format_mpfr, format_radius
from .errors import DomainError, InvariantViolation
from .field import QElem


def inverse_power(base: BetaParam, n: int) -> Enclosure:
    """Certified ``beta^-n``."""
    q = base.precision_bits + 32
    lo, hi = base.field.inverse_power_bounds(n, q)
    return Enclosure.from_scaled_ints(lo[n], hi[n], q, base.precision_bits)


def inverse_powers(base: BetaParam, n: int) -> list[Enclosure]:
    """Certified ``beta^-k`` for ``k = 0..n``."""
    q = base.precision_bits + 32
    lo, hi = base.field.inverse_power_bounds(n, q)
    return [Enclosure.from_scaled_ints(lo[k], hi[k], q, base.precision_bits) for k in range(n + 1)]


def geometric_tail(base: BetaParam, k: int) -> mpfr:
    """Upper bound for ``sum_{n >= k} beta^-n``."""
    t = inverse_power(base, k) / (1 - base.inv_beta)
    return t.upper()


def depth_for_tail(base: BetaParam, bits: float) -> int:
    """Smallest K with ``beta^-(K+1) / (1 - 1/beta) <= 2^-bits``."""
    gap = -math.log2(1 - 2.0 ** -base.log2_beta)
    k = max(1, math.ceil((bits + gap) / base.log2_beta) - 1)
    while geometric_tail(base, k + 1) > mpfr(2) ** -bits:
        k += 1
    return k


def default_depth(base: BetaParam) -> int:
    return depth_for_tail(base, base.precision_bits / 2)


@dataclass(frozen=True, eq=False)
class PiecewiseDensity:
    """Truncated Parry density.

    Cell ``j`` (1-based) is ``(breakpoints[j-1], breakpoints[j]]`` and carries
    the unnormalized level ``levels[j-1]`` (a truncated sum; the true level
    exceeds it by at most ``tail_bound``).  ``cdf_prefix[j-1]`` is the part of
    the CDF numerator contributed by orbit points left of the cell, so
    ``C(t) = cdf_prefix[j-1] + t * levels[j-1]`` on cell ``j``.
    """

    base: BetaParam
    depth: int
    orbit_of_one: tuple
    breakpoints: tuple
    levels: tuple
    cdf_prefix: tuple
    tail_bound: mpfr
    F: Enclosure
    M: Enclosure
    orbit_terminates: bool
    bp_lower: tuple = ()
    bp_upper: tuple = ()

    @property
    def K(self) -> int:
        return self.depth

    @property
    def n_cells(self) -> int:
        return len(self.levels)

    @property
    def envelope(self) -> float:
        """Upper bound for the normalized density, ``1 / (F (1 - 1/beta))``."""
        e = 1 / (self.F * (1 - self.base.inv_beta))
        return float(e.upper())

    def float_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """(breakpoints, normalized levels) as float64 arrays for sampling."""
        bp = np.array([float(b.value) for b in self.breakpoints])
        lv = np.array([float(l.value) for l in self.levels]) / float(self.F.value)
        return bp, lv


# exact payloads larger than this many bits (relative to the working
# precision) are not kept on stored breakpoints
PAYLOAD_FACTOR = 8


def _cmp(a: Enclosure, b: Enclosure, f) -> int:
    if a.certainly_lt(b):
        return -1
    if a.certainly_gt(b):
        return 1
    if a.exact is not None and b.exact is not None:
        return f.sign(f.sub(a.exact, b.exact))
    # overlapping balls without exact payloads are merged
    return 0


def _orbit_of_one(base: BetaParam, K: int) -> Iterator[QElem]:
    """``tau^n(1)`` for n = 0..K, stopping early at 0.

    At beta = 2 the literal map gives ``tau(1) = 2 - [2] = 0``; the
    constant-1 digit convention is a statement about digits, not about the
    orbit entering the density.
    """
    one = point(base, 1)
    yield exact_state(base, one)
    if base.is_two:
        return
    it = iter_orbit(base, one)
    for _ in range(K):
        _, e = next(it)
        if not any(e.c):
            return
        yield e


def _scaled_bounds(f, e: QElem, q: int) -> tuple[int, int]:
    """Integers bounding ``e * 2^q`` (denominator included)."""
    lo, hi = f.bounds(e, q)
    return lo // e.den, -((-hi) // e.den)


def parry_constants(base: BetaParam, K: Optional[int] = None) -> tuple:
    """``(F, M, K, orbit_terminates)`` without building the cell table.

    The truncated sums are accumulated as integer bounds at ``precision + 32``
    bits over the exact orbit of 1.
    """
    if K is None:
        K = default_depth(base)
    if K < 1:
        raise DomainError("K must be >= 1")
    base.check_precision(K, "parry_constants")
    f = base.field
    p = base.precision_bits
    q = p + 32 + K.bit_length()
    ilo, ihi = f.inverse_power_bounds(K, q)
    inv = f.inv_beta()
    f_lo = f_hi = m_lo = m_hi = 0
    n_terms = 0
    for n, e in enumerate(_orbit_of_one(base, K)):
        n_terms += 1
        lo, hi = _scaled_bounds(f, e, q)
        f_lo += (max(lo, 0) * ilo[n]) >> q
        f_hi += -((-(hi * ihi[n])) >> q)
        d = f.sub(e, inv)
        if f.sign(d) > 0:
            lo, hi = _scaled_bounds(f, d, q)
            m_lo += (max(lo, 0) * ilo[n]) >> q
            m_hi += -((-(hi * ihi[n])) >> q)
    terminates = n_terms <= K
    tail = mpfr(0) if terminates else geometric_tail(base, K + 1)
    F = add_tail(Enclosure.from_scaled_ints(f_lo, f_hi, q, p), tail)
    Mnum = add_tail(Enclosure.from_scaled_ints(m_lo, m_hi, q, p), tail)
    return F, Mnum / F, K, terminates


def digit_frequency(base: BetaParam, K: Optional[int] = None) -> Enclosure:
    """``M_beta = m([1/beta, 1])``, the almost-sure frequency of the digit 1."""
    return parry_constants(base, K)[1]


def build_density(base: BetaParam, K: Optional[int] = None) -> PiecewiseDensity:
    """Parry density truncated after ``tau^K(1)``."""
    F, M, K, terminates = parry_constants(base, K)
    f = base.field
    p = base.precision_bits
    invp = inverse_powers(base, K)
    zero = Enclosure.point(0, p)
    encs = []
    for e in _orbit_of_one(base, K):
        enc = base.to_enclosure(e)
        if max(abs(c).bit_length() for c in e.c) + e.den.bit_length() > PAYLOAD_FACTOR * p:
            enc = Enclosure(enc.value, enc.radius)
        encs.append(enc)
    tail = mpfr(0) if terminates else geometric_tail(base, K + 1)

    cmp = lambda a, b: _cmp(a, b, f)
    order = sorted(range(len(encs)), key=functools.cmp_to_key(lambda i, j: cmp(encs[i], encs[j])))
    distinct = [base.to_enclosure(f.zero())]
    pos = [0] * len(encs)
    for i in order:
        if cmp(encs[i], distinct[-1]) != 0:
            distinct.append(encs[i])
        pos[i] = len(distinct) - 1

    m = len(distinct) - 1
    weight = [zero] * (m + 1)
    mass = [zero] * (m + 1)
    for n, (j, x) in enumerate(zip(pos, encs)):
        weight[j] = weight[j] + invp[n]
        mass[j] = mass[j] + x * invp[n]
    levels = []
    suffix = zero
    for j in range(m, 0, -1):
        suffix = suffix + weight[j]
        levels.append(suffix)
    levels.reverse()
    prefix = []
    acc = zero
    for j in range(1, m + 1):
        prefix.append(acc)
        acc = acc + mass[j]

    return PiecewiseDensity(
        base, K, tuple(encs), tuple(distinct), tuple(levels), tuple(prefix), tail, F, M, terminates,
        tuple(b.lower() for b in distinct), tuple(b.upper() for b in distinct),
    )


def _locate(D: PiecewiseDensity, t: Enclosure) -> tuple[int, int]:
    """Range ``[j0, j1]`` of cells (1-based) that may contain ``t``."""
    bps = D.breakpoints
    n = len(bps) - 1
    lo_t, hi_t = t.lower(), t.upper()
    # j0: first cell whose right end may be >= t; j1: last whose left end may be < t
    j0 = min(max(bisect.bisect_left(D.bp_upper, lo_t), 1), n)
    j1 = min(max(bisect.bisect_left(D.bp_lower, hi_t), j0), n)
    if t.exact is not None and j0 != j1:
        f = D.base.field
        ex = exact_state(D.base, t)
        for j in range(j0, j1):
            if bps[j].exact is None:
                return j0, j1
            if f.sign(f.sub(ex, bps[j].exact)) <= 0:
                return j, j
        return j1, j1
    return j0, j1


def _cdf(D: PiecewiseDensity, t: Enclosure) -> Enclosure:
    """Truncated CDF numerator ``C(t) = sum beta^-n min(t, tau^n(1))``."""
    j0, j1 = _locate(D, t)
    out = None
    for j in range(j0, j1 + 1):
        c = D.cdf_prefix[j - 1] + t * D.levels[j - 1]
        out = c if out is None else out.hull(c)
    return out


def _coerce(D: PiecewiseDensity, x) -> Enclosure:
    if isinstance(x, Enclosure):
        return x
    return point(D.base, x)


def density_eval(D: PiecewiseDensity, x) -> Enclosure:
    """Normalized density at ``x``; breakpoint-straddling balls widen the result."""
    x = _coerce(D, x)
    if x.certainly_lt(0) or x.certainly_gt(1):
        raise DomainError("point outside [0, 1]")
    j0, j1 = _locate(D, x)
    lev = D.levels[j0 - 1]
    for j in range(j0 + 1, j1 + 1):
        lev = lev.hull(D.levels[j - 1])
    return add_tail(lev, D.tail_bound) / D.F


def interval_measure(D: PiecewiseDensity, a, b) -> Enclosure:
    """``m_beta([a, b])`` with certified radius."""
    a, b = _coerce(D, a), _coerce(D, b)
    if a.certainly_gt(b):
        raise DomainError("interval_measure needs a <= b")
    if a.certainly_lt(0) or b.certainly_gt(1):
        raise DomainError("interval outside [0, 1]")
    if a.exact is not None and b.exact is not None:
        f = D.base.field
        if f.sign(f.sub(exact_state(D.base, b), exact_state(D.base, a))) < 0:
            raise DomainError("interval_measure needs a <= b")
    width = (b - a).nonneg()
    num = _cdf(D, b) - _cdf(D, a)
    num = add_tail(num.nonneg(), ctx_up().mul(D.tail_bound, width.upper()))
    m = num / D.F
    bound = width / (D.F * (1 - D.base.inv_beta))
    if m.lower() > bound.upper():
        raise InvariantViolation("interval measure exceeds (b-a)/(F(1-1/beta))")
    return m


def measure_upper_bound(D: PiecewiseDensity, a, b) -> Enclosure:
    """The density-based bound ``(b - a) / (F (1 - 1/beta))``."""
    a, b = _coerce(D, a), _coerce(D, b)
    return (b - a) / (D.F * (1 - D.base.inv_beta))


def preimage(base: BetaParam, a, b) -> list[tuple[Enclosure, Enclosure]]:
    """``tau^-1([a, b])`` as a list of intervals, one per branch of the map."""
    f = base.field
    ea, eb = base.element(a), base.element(b)
    out = [(f.div_beta(ea), f.div_beta(eb))]
    lo = f.div_beta(f.add_int(ea, 1))
    if f.cmp_int(lo, 1) <= 0:
        hi = f.div_beta(f.add_int(eb, 1))
        if f.cmp_int(hi, 1) > 0:
            hi = f.one()
        out.append((lo, hi))
    return [(base.to_enclosure(f.reduce(x)), base.to_enclosure(f.reduce(y))) for x, y in out]


def density_csv(D: PiecewiseDensity) -> str:
    """Cell table; the first line is a ``#`` comment with the global constants."""
    buf = io.StringIO()
    buf.write(
        "# beta={},K={},F={},F_radius={},M={},M_radius={},tail_bound={}\n".format(
            D.base.label,
            D.depth,
            format_mpfr(D.F.value),
            format_radius(D.F.radius),
            format_mpfr(D.M.value),
            format_radius(D.M.radius),
            format_radius(D.tail_bound),
        )
    )
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["breakpoint_lo", "breakpoint_hi", "level", "level_radius"])
    for j, lev in enumerate(D.levels, start=1):
        full = add_tail(lev, D.tail_bound)
        w.writerow(
            [
                format_mpfr(D.breakpoints[j - 1].value),
                format_mpfr(D.breakpoints[j].value),
                format_mpfr(full.value),
                format_radius(full.radius),
            ]
        )
    return buf.getvalue()


def density_summary(D: PiecewiseDensity) -> dict:
    return {
        "beta": D.base.label,
        "K": D.depth,
        "F": D.F.to_dict(),
        "M": D.M.to_dict(),
        "tail_bound": format_radius(D.tail_bound),
        "orbit_terminates": D.orbit_terminates,
        "n_cells": D.n_cells,
    }
