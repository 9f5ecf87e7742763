"""The generalized Takagi function G_beta and the classical Takagi function.

``G_beta(x) = sum_n g_n beta^-n (n - S_{n-1} / M)`` with ``S_n = g_1 + ... + g_n``
is evaluated by two independent routes: the defining series, and the
rearrangement ``(x + sum_n g_n beta^-n (M n - S_n)) / M``.  Both partial sums
are accumulated as integer fixed-point bounds over certified powers of
``1/beta``; the analytic remainder bound is then added to the radius.
Points whose greedy expansion terminates are summed exactly, with no tail.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from gmpy2 import mpfr

from .beta_dynamics import BetaParam, GreedyDigits, exact_state, iter_orbit, synthesize
from .enclosure import Enclosure, add_tail, ctx_up, format_mpfr, format_radius, widen
from .errors import DomainError
from .field import QElem
from .invariant_measure import inverse_power

TAIL_BITS = 64

Point = Union[Enclosure, GreedyDigits]


def g_tail_bound(base: BetaParam, M: Enclosure, depth: int) -> mpfr:
    """Upper bound for ``(1 + 1/M) sum_{n > depth} n beta^-n``.

    Closed form ``(1 + 1/M) r^(d+1) ((d+1)(1-r) + r) / (1-r)^2``, ``r = 1/beta``.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    r = base.inv_beta
    s = 1 - r
    t = inverse_power(base, depth + 1) * ((depth + 1) * s + r) / (s * s)
    t = t * (1 + 1 / M)
    return t.upper()


def default_depth(base: BetaParam, M: Enclosure, bits: int = TAIL_BITS) -> int:
    """Smallest depth whose tail bound is at most ``2^-bits``."""
    target = mpfr(2) ** -bits
    d = max(2, int(bits / base.log2_beta))
    while g_tail_bound(base, M, d) > target:
        d += max(1, d // 16)
    while d > 2 and g_tail_bound(base, M, d - 1) <= target:
        d -= 1
    return d


@dataclass(frozen=True)
class _Digits:
    ones: tuple  # positions n with g_n = 1 (1-based, ascending)
    depth: int
    terminal: bool
    x: Enclosure


def _read_digits(base: BetaParam, x: Point, depth: int) -> _Digits:
    if isinstance(x, GreedyDigits):
        ds = x.digits[:depth]
        terminal = x.terminal and len(x.digits) <= depth
        return _Digits(tuple(i for i, d in enumerate(ds, 1) if d), len(ds), terminal, synthesize(base, x))
    base.check_precision(depth, "G_beta")
    ones = []
    exact = x.exact is not None
    if exact and not any(exact_state(base, x).c):
        return _Digits((), 0, True, x)
    n = 0
    for d, state in iter_orbit(base, x):
        n += 1
        if d:
            ones.append(n)
        if exact and not any(state.c):
            return _Digits(tuple(ones), n, True, x)
        if n >= depth:
            break
    return _Digits(tuple(ones), depth, False, x)


def _fixed_point_sums(base: BetaParam, ones: Sequence[int], depth: int):
    """Enclosures of A = sum n r^n, B = sum S_{n-1} r^n, C = sum S_n r^n over ones."""
    p = base.precision_bits
    q = p + 32 + 2 * max(depth, 1).bit_length()
    if not ones:
        z = Enclosure.point(0, p)
        return z, z, z
    lo, hi = base.field.inverse_power_bounds(max(ones), q)
    a_lo = a_hi = b_lo = b_hi = c_lo = c_hi = 0
    for s, n in enumerate(ones):
        l, h = lo[n], hi[n]
        a_lo += n * l
        a_hi += n * h
        b_lo += s * l
        b_hi += s * h
        c_lo += (s + 1) * l
        c_hi += (s + 1) * h
    mk = lambda u, v: Enclosure.from_scaled_ints(u, v, q, p)
    return mk(a_lo, a_hi), mk(b_lo, b_hi), mk(c_lo, c_hi)


def _route_def(A: Enclosure, B: Enclosure, M: Enclosure) -> Enclosure:
    return A - B / M


def _route_lemma(x: Enclosure, A: Enclosure, C: Enclosure, M: Enclosure) -> Enclosure:
    return (x + M * A - C) / M


def _strip(x: Enclosure) -> Enclosure:
    return Enclosure(x.value, x.radius)


def g_def(base: BetaParam, x: Point, M: Enclosure, depth: Optional[int] = None) -> Enclosure:
    """G_beta(x) from the defining series, truncated at ``depth``."""
    depth = depth or default_depth(base, M)
    if depth < 2:
        raise DomainError("depth must be >= 2")
    d = _read_digits(base, x, depth)
    A, B, _ = _fixed_point_sums(base, d.ones, d.depth)
    v = _route_def(A, B, M)
    return v if d.terminal else widen(v, g_tail_bound(base, M, depth))


def g_lemma1(base: BetaParam, x: Point, M: Enclosure, depth: Optional[int] = None) -> Enclosure:
    """G_beta(x) from the rearranged series ``(x + sum g_n r^n (M n - S_n)) / M``."""
    depth = depth or default_depth(base, M)
    if depth < 2:
        raise DomainError("depth must be >= 2")
    d = _read_digits(base, x, depth)
    A, _, C = _fixed_point_sums(base, d.ones, d.depth)
    v = _route_lemma(_strip(d.x), A, C, M)
    return v if d.terminal else widen(v, g_tail_bound(base, M, depth))


@dataclass(frozen=True)
class GTakagiEval:
    base: BetaParam
    x: Enclosure
    M: Enclosure
    depth: int
    value_def: Enclosure
    value_lemma1: Enclosure
    tail_bound: mpfr
    terminal: bool

    @property
    def agree(self) -> bool:
        return self.value_def.overlaps(self.value_lemma1)

    @property
    def value(self) -> Enclosure:
        return self.value_def

    def to_dict(self) -> dict:
        return {
            "x": format_mpfr(self.x.value),
            "value": self.value_def.to_dict(),
            "value_lemma1": self.value_lemma1.to_dict(),
            "depth": self.depth,
            "tail_bound": format_radius(self.tail_bound),
            "terminal": self.terminal,
            "routes_agree": self.agree,
        }


def evaluate(base: BetaParam, x: Point, M: Enclosure, depth: Optional[int] = None) -> GTakagiEval:
    """Both routes from a single digit read."""
    depth = depth or default_depth(base, M)
    if depth < 2:
        raise DomainError("depth must be >= 2")
    d = _read_digits(base, x, depth)
    out = evaluate_ones(base, d.x, d.ones, d.depth, d.terminal, M)
    return GTakagiEval(base, d.x, M, depth, out.value_def, out.value_lemma1, out.tail_bound, d.terminal)


@dataclass(frozen=True)
class AffineG:
    """``G = A - B / M`` with the digit sums A, B of a finite expansion.

    Keeping the dependence on M symbolic lets differences of G at nearby
    points be formed before dividing by M, so the radius of M is not
    amplified by the dependency problem of interval arithmetic.
    """

    A: Enclosure
    B: Enclosure
    terminal: bool

    def value(self, M: Enclosure) -> Enclosure:
        return _route_def(self.A, self.B, M)

    def __sub__(self, other: "AffineG") -> "AffineG":
        return AffineG(self.A - other.A, self.B - other.B, self.terminal and other.terminal)


def affine_g(base: BetaParam, x: Point, depth: int) -> AffineG:
    """Digit sums of the defining series; exact only for terminating expansions."""
    d = _read_digits(base, x, depth)
    A, B, _ = _fixed_point_sums(base, d.ones, d.depth)
    return AffineG(A, B, d.terminal)


def affine_from_ones(base: BetaParam, ones: Sequence[int], depth: int, terminal: bool = True) -> AffineG:
    A, B, _ = _fixed_point_sums(base, ones, depth)
    return AffineG(A, B, terminal)


def evaluate_ones(
    base: BetaParam, x: Enclosure, ones: Sequence[int], depth: int, terminal: bool, M: Enclosure
) -> GTakagiEval:
    """Both routes from precomputed 1-digit positions (``ones`` within ``depth``)."""
    A, B, C = _fixed_point_sums(base, ones, depth)
    tail = mpfr(0) if terminal else g_tail_bound(base, M, depth)
    vd = widen(_route_def(A, B, M), tail)
    vl = widen(_route_lemma(_strip(x), A, C, M), tail)
    return GTakagiEval(base, x, M, depth, vd, vl, tail, terminal)


def single_digit_increment(base: BetaParam, ds: Sequence[int], m: int, M: Enclosure) -> Enclosure:
    """``beta^-m (m - S_{m-1} / M)``: the change in G from setting digit m to 1."""
    s = sum(ds[: m - 1])
    return inverse_power(base, m) * (m - Enclosure.point(s, base.precision_bits) / M)


# -- classical Takagi function ---------------------------------------------------


def _tent_fraction(t: Fraction) -> Fraction:
    return 2 * t if 2 * t <= 1 else 2 - 2 * t


def takagi_classical(x: Union[Fraction, str, int, Enclosure], depth: int, prec: int = 256) -> Enclosure:
    """``sum_{n=1}^{depth} T^n(x) / 2^n`` for the tent map T, plus the remainder ``[0, 2^-depth]``."""
    if depth < 0:
        raise DomainError("negative depth")
    if isinstance(x, Enclosure):
        if x.exact is not None and not isinstance(x.exact, QElem):
            x = Fraction(x.exact)
        elif isinstance(x.exact, QElem) and x.exact.field.is_rational:
            x = x.exact.to_fraction()
        else:
            return _takagi_ball(x, depth, prec)
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise DomainError("point outside [0, 1]")
    t = x
    terms = []
    for n in range(1, depth + 1):
        t = _tent_fraction(t)
        terms.append((n, t))
        if t == 0:
            s = sum((u / (1 << k) for k, u in terms), Fraction(0))
            return Enclosure.point(s, prec)
    s = sum((u / (1 << k) for k, u in terms), Fraction(0))
    return add_tail(Enclosure.point(s, prec), mpfr(2) ** -depth)


def _takagi_ball(x: Enclosure, depth: int, prec: int) -> Enclosure:
    x = x.clip(0, 1)
    s = Enclosure.point(0, prec)
    t = x
    for n in range(1, depth + 1):
        if t.certainly_le(Fraction(1, 2)):
            t = t.mul_2exp(1)
        elif t.certainly_ge(Fraction(1, 2)):
            t = 2 - t.mul_2exp(1)
        else:
            lo = min(t.lower(), 1 - t.upper())
            t = Enclosure.from_bounds(ctx_up(prec).mul_2exp(lo, 1) if lo > 0 else mpfr(0), mpfr(1), prec)
        t = t.clip(0, 1)
        s = s + t.mul_2exp(-n)
    return add_tail(s, mpfr(2) ** -depth)


# -- batch -----------------------------------------------------------------------


def _eval_one(args):
    base, x, M, depth = args
    return evaluate(base, x, M, depth)


def evaluate_batch(
    base: BetaParam,
    xs: Sequence[Point],
    M: Enclosure,
    depth: Optional[int] = None,
    workers: int = 1,
) -> list[GTakagiEval]:
    """Evaluate many points; the result order matches ``xs`` for any ``workers``."""
    depth = depth or default_depth(base, M)
    jobs = [(base, x, M, depth) for x in xs]
    if workers <= 1 or len(jobs) < 2:
        return [_eval_one(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_eval_one, jobs, chunksize=chunk))


def batch_csv(evals: Sequence[GTakagiEval]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "value", "radius", "depth"])
    for e in evals:
        w.writerow([format_mpfr(e.x.value), format_mpfr(e.value_def.value), format_radius(e.value_def.radius), e.depth])
    return buf.getvalue()


def batch_json(base: BetaParam, M: Enclosure, evals: Sequence[GTakagiEval]) -> dict:
    return {
        "beta": base.label,
        "M": format_mpfr(M.value),
        "M_radius": format_radius(M.radius),
        "points": [
            {
                "x": format_mpfr(e.x.value),
                "value": format_mpfr(e.value_def.value),
                "radius": format_radius(e.value_def.radius),
                "depth": e.depth,
            }
            for e in evals
        ],
    }
