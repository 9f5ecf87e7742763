"""Separation inequalities, log-limit traces, Hölder probes and witness sequences.

Everything here works on exact points (rationals, or elements of Q(beta)),
so separation times and orbit values are decided exactly and reported as
certified enclosures.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from gmpy2 import mpfr

from .beta_dynamics import (
    BetaParam,
    Trilean,
    exact_state,
    is_simple,
    iter_orbit,
    point,
    separation_time,
)
from .enclosure import Enclosure, format_mpfr, format_radius
from .errors import DomainError, InvariantViolation, NotEnoughOnes, SeparationNotFound
from .field import QElem
from .invariant_measure import PiecewiseDensity, inverse_power
from .rng import stream
from .takagi import AffineG, affine_from_ones, default_depth, evaluate, evaluate_ones

TAG_HOLDER = 1


def _m_of(density_or_m) -> Enclosure:
    return density_or_m.M if isinstance(density_or_m, PiecewiseDensity) else density_or_m


def _exact_point(base: BetaParam, x) -> tuple[Enclosure, QElem]:
    if not isinstance(x, Enclosure):
        x = point(base, x)
    e = exact_state(base, x)
    if e is None:
        raise DomainError("an exact point is required")
    return x, e


def _inv_power_exact(base: BetaParam, n: int) -> QElem:
    f = base.field
    e = f.one()
    for _ in range(n):
        e = f.div_beta(e)
    return f.reduce(e)


def _orbit_state(base: BetaParam, e: QElem, n: int) -> QElem:
    it = iter_orbit(base, base.to_enclosure(e))
    s = e
    for _ in range(n):
        s = next(it)[1]
    return s


# -- separation inequalities --------------------------------------------------


@dataclass(frozen=True)
class Lemma2Report:
    N: int
    side: str  # "left": y < x, bound tau^N(x) beta^-N; "right": y > x, bound (1 - tau^N(x)) beta^-N
    lhs: Enclosure
    rhs: Enclosure
    holds: bool
    certified: bool  # decided by disjoint enclosures (otherwise by exact arithmetic)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "side": self.side,
            "lhs": self.lhs.to_dict(),
            "rhs": self.rhs.to_dict(),
            "holds": self.holds,
            "certified": self.certified,
        }


def lemma2_check(base: BetaParam, x, y, max_depth: Optional[int] = None) -> Lemma2Report:
    """Check ``x - y >= tau^N(x)/beta^N`` (y < x) or ``y - x >= (1 - tau^N(x))/beta^N`` (y > x)."""
    x, ex = _exact_point(base, x)
    y, ey = _exact_point(base, y)
    f = base.field
    order = f.sign(f.sub(ex, ey))
    if order == 0:
        raise SeparationNotFound("x = y has no separation time")
    max_depth = base.max_depth() if max_depth is None else max_depth
    N = separation_time(base, x, y, max_depth)
    if N is None:
        raise SeparationNotFound(f"digits agree through depth {max_depth}")
    if is_simple(base, x, N + 1).answer is Trilean.YES:
        raise DomainError("x is simple")
    t = _orbit_state(base, ex, N)
    ipow = _inv_power_exact(base, N)
    if order > 0:
        side, diff, num = "left", f.sub(ex, ey), t
    else:
        side, diff, num = "right", f.sub(ey, ex), f.add_int(-t, 1)
    rhs_exact = f.mul(num, ipow)
    lhs = base.to_enclosure(f.reduce(diff))
    rhs = inverse_power(base, N) * base.to_enclosure(num)
    if lhs.certainly_gt(rhs):
        return Lemma2Report(N, side, lhs, rhs, True, True)
    if lhs.certainly_lt(rhs):
        return Lemma2Report(N, side, lhs, rhs, False, True)
    holds = f.sign(f.sub(diff, rhs_exact)) >= 0
    return Lemma2Report(N, side, lhs, rhs, holds, False)


# -- log-limit traces ------------------------------------------------------------


@dataclass(frozen=True)
class Lemma3Row:
    n: int
    log_tau: Optional[Enclosure]  # (1/n) log_beta tau^n(x); None when tau^n(x) = 0
    log_one_minus: Optional[Enclosure]  # (1/n) log_beta (1 - tau^n(x)); None when tau^n(x) = 1
    event_A: bool  # tau^n(x) <= 1/n^2
    event_B: bool  # tau^n(x) >= 1 - 1/n^2


@dataclass(frozen=True)
class Lemma3Trace:
    base: BetaParam
    x: Enclosure
    rows: tuple

    @property
    def count_A(self) -> int:
        return sum(r.event_A for r in self.rows)

    @property
    def count_B(self) -> int:
        return sum(r.event_B for r in self.rows)

    def last_event(self) -> Optional[int]:
        """Largest n with an A or B event."""
        hits = [r.n for r in self.rows if r.event_A or r.event_B]
        return hits[-1] if hits else None

    def events_after(self, n0: int) -> int:
        return sum((r.event_A or r.event_B) for r in self.rows if r.n > n0)

    def row(self, n: int) -> Lemma3Row:
        return self.rows[n - 1]

    def summary(self) -> dict:
        return {
            "n_max": len(self.rows),
            "count_A": self.count_A,
            "count_B": self.count_B,
            "last_event": self.last_event(),
        }


LOG_PREC = 64


def lemma3_trace(base: BetaParam, x, n_max: int) -> Lemma3Trace:
    """Rows ``n = 1..n_max`` of the two normalized log series and the Borel-Cantelli events."""
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    base.check_precision(n_max, "lemma3_trace")
    x, ex = _exact_point(base, x)
    f = base.field
    ln_beta = base.beta.round_to(LOG_PREC).log()
    rows = []
    it = iter_orbit(base, x)
    for n in range(1, n_max + 1):
        _, e = next(it)
        enc = base.to_enclosure(e).round_to(LOG_PREC)
        thr = Fraction(1, n * n)
        # events are decided exactly in the field
        ev_a = f.sign(f.sub(e, f.coerce(thr))) <= 0
        ev_b = f.sign(f.sub(e, f.coerce(1 - thr))) >= 0
        lt = None if not any(e.c) else enc.log() / ln_beta / n
        om = f.add_int(-e, 1)
        lo = None if not any(om.c) else base.to_enclosure(om).round_to(LOG_PREC).log() / ln_beta / n
        rows.append(Lemma3Row(n, lt, lo, ev_a, ev_b))
    return Lemma3Trace(base, x, tuple(rows))


def lemma3_csv(tr: Lemma3Trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "log_tau", "log_tau_radius", "log_one_minus", "log_one_minus_radius", "event_A", "event_B"])
    for r in tr.rows:
        cells = [r.n]
        for v in (r.log_tau, r.log_one_minus):
            cells += ["-inf", "0"] if v is None else [format_mpfr(v.value, 17), format_radius(v.radius)]
        w.writerow(cells + [int(r.event_A), int(r.event_B)])
    return buf.getvalue()


# -- Hölder probes -----------------------------------------------------------------


def k_constant(base: BetaParam, N: int) -> Enclosure:
    """``beta^N sum_{n >= N} 4 n beta^-n = 4 (N (1 - r) + r) / (1 - r)^2`` with ``r = 1/beta``."""
    r = base.inv_beta
    s = 1 - r
    return 4 * (N * s + r) / (s * s)


def uniform_k(base: BetaParam, alpha: float) -> tuple[float, int]:
    """``sup_N K(N) beta^-(1-alpha) N`` and the maximizing N (float-level report)."""
    b = float(base.beta.value)
    r = 1 / b
    best, arg = 0.0, 1
    n = 1
    while True:
        v = 4 * (n * (1 - r) + r) / (1 - r) ** 2 * b ** (-(1 - alpha) * n)
        if v > best:
            best, arg = v, n
        elif n > arg + 2:
            break
        n += 1
    return best, arg


@dataclass(frozen=True)
class HolderSample:
    index: int
    side: str
    y: str
    delta: str
    N: Optional[int]
    quotient: Optional[Enclosure]
    bound: Optional[Enclosure]
    uniform_bound: Optional[float]
    status: str  # ok | uncertified | violation | out_of_range | no_separation

    def to_dict(self) -> dict:
        d = {
            "index": self.index,
            "side": self.side,
            "y": self.y,
            "delta": self.delta,
            "N": self.N,
            "status": self.status,
        }
        if self.quotient is not None:
            d["quotient"] = self.quotient.to_dict()
            d["bound"] = self.bound.to_dict()
            d["uniform_bound"] = repr(self.uniform_bound)
        return d


@dataclass(frozen=True)
class HolderProbeReport:
    base: BetaParam
    x: Enclosure
    alpha: float
    side: str
    seed: int
    samples: tuple
    uniform_K: float

    def _ok(self):
        return [s for s in self.samples if s.status in ("ok", "violation")]

    @property
    def counts(self) -> dict:
        out = {}
        for s in self.samples:
            out[s.status] = out.get(s.status, 0) + 1
        return dict(sorted(out.items()))

    @property
    def max_quotient(self) -> Optional[Enclosure]:
        got = self._ok()
        return max((s.quotient for s in got), key=lambda q: q.upper(), default=None)

    @property
    def max_bound(self) -> Optional[Enclosure]:
        got = self._ok()
        return max((s.bound for s in got), key=lambda q: q.upper(), default=None)

    @property
    def all_within_bound(self) -> bool:
        return not any(s.status == "violation" for s in self.samples)

    def to_dict(self) -> dict:
        mq, mb = self.max_quotient, self.max_bound
        return {
            "beta": self.base.label,
            "x": format_mpfr(self.x.value),
            "alpha": repr(self.alpha),
            "side": self.side,
            "seed": self.seed,
            "uniform_K": repr(self.uniform_K),
            "samples": [s.to_dict() for s in self.samples],
            "max_quotient": None if mq is None else mq.to_dict(),
            "max_bound": None if mb is None else mb.to_dict(),
            "counts": self.counts,
        }


def probe_depth(base: BetaParam, M: Enclosure, delta_min: float) -> int:
    """G truncation depth whose tail is far below ``delta_min``."""
    return default_depth(base, M, 64 + max(0, math.ceil(-math.log2(delta_min))))


def probe_precision(beta: str, delta_min: float) -> int:
    """Working precision sufficient for :func:`holder_probe` at ``delta_min``."""
    from .invariant_measure import digit_frequency

    b = BetaParam.parse(beta, 256)
    d = probe_depth(b, digit_frequency(b), delta_min)
    return b.required_bits(d) + 32


@dataclass(frozen=True)
class _ProbeContext:
    base: BetaParam
    M: Enclosure
    x: Enclosure
    ex: QElem
    digits: tuple
    states: tuple
    Gx: Enclosure
    depth: int
    alphas: tuple
    delta_min: float
    delta_max: float
    seed: int
    side: str
    ukappa: tuple


def _probe_one(ctx: _ProbeContext, i: int) -> list[HolderSample]:
    f = ctx.base.field
    gen = stream(ctx.seed, i, TAG_HOLDER)
    side = ctx.side if ctx.side != "both" else ("left" if i % 2 == 0 else "right")
    lo, hi = math.log(ctx.delta_min), math.log(ctx.delta_max)
    delta = Fraction(math.exp(lo + (hi - lo) * gen.random()))
    return _sample_at(ctx, i, side, f.coerce(delta))


def _sample_at(ctx: _ProbeContext, i: int, side: str, delta: QElem) -> list[HolderSample]:
    """Quotient and bound for ``y = x - delta`` (left) or ``x + delta`` (right)."""
    base, f = ctx.base, ctx.base.field
    ey = f.sub(ctx.ex, delta) if side == "left" else f.add(ctx.ex, delta)
    ey = f.reduce(ey)
    dist = base.to_enclosure(f.reduce(delta))
    y_txt = format_mpfr(base.to_enclosure(ey).value)
    d_txt = format_mpfr(dist.round_to(64).value, 17)

    def blank(status, N=None):
        return [HolderSample(i, side, y_txt, d_txt, N, None, None, None, status) for _ in ctx.alphas]

    if f.sign(ey) <= 0 or f.cmp_int(ey, 1) >= 0:
        return blank("out_of_range")
    y = base.to_enclosure(ey)
    # digits of y, separation time against the stored digits of x
    N = None
    ones = []
    terminal = False
    n = 0
    for d, s in iter_orbit(base, y):
        n += 1
        if d:
            ones.append(n)
        if N is None and d != ctx.digits[n - 1]:
            N = n
        if not any(s.c):
            terminal = True
            break
        if n >= ctx.depth:
            break
    if N is None and terminal:
        # every later digit of y is 0
        N = next((k + 1 for k in range(n, ctx.depth) if ctx.digits[k]), None)
    if N is None:
        return blank("no_separation")
    Gy = evaluate_ones(base, y, ones, n if terminal else ctx.depth, terminal, ctx.M).value_def
    diff = abs(ctx.Gx - Gy)
    tN = ctx.states[N - 1]
    t = tN if side == "left" else f.add_int(-tN, 1)
    if not any(t.c):
        return blank("no_separation", N)
    t_enc = base.to_enclosure(t)
    K = k_constant(base, N)
    inv_m = 1 / ctx.M
    out = []
    for a, uk in zip(ctx.alphas, ctx.ukappa):
        am = mpfr(a, 64)
        q = diff / dist.pow(am)
        # beta^-(1-alpha) N; alpha is a binary float, so this exponent is exact at 128 bits
        ex = mpfr((Fraction(a) - 1) * N, 128)
        damp = base.beta.pow(ex)
        bound = inv_m + K * damp * inv_m / t_enc.pow(am)
        ub = float(inv_m.upper()) * (1 + uk / float(t_enc.lower()) ** a)
        if q.certainly_le(bound):
            status = "ok"
        elif q.certainly_gt(bound):
            status = "violation"
        else:
            status = "uncertified"
        out.append(HolderSample(i, side, y_txt, d_txt, N, q, bound, ub, status))
    return out


def _make_context(base, M, x, alphas, depth, delta_min, delta_max, seed, side) -> _ProbeContext:
    for a in alphas:
        if not 0 < a < 1:
            raise DomainError("alpha must lie in (0, 1)")
    x, ex = _exact_point(base, x)
    f = base.field
    if f.sign(ex) <= 0 or f.cmp_int(ex, 1) >= 0:
        raise DomainError("x must be interior")
    depth = depth or probe_depth(base, M, delta_min)
    base.check_precision(depth, "holder_probe")
    if is_simple(base, x, depth).answer is Trilean.YES:
        raise DomainError("x is simple")
    digits, states = [], []
    for d, s in iter_orbit(base, x):
        digits.append(d)
        states.append(s)
        if len(digits) >= depth:
            break
    Gx = evaluate(base, x, M, depth).value_def
    uk = tuple(uniform_k(base, a)[0] for a in alphas)
    return _ProbeContext(
        base, M, x, ex, tuple(digits), tuple(states), Gx, depth, tuple(alphas),
        delta_min, delta_max, seed, side, uk,
    )


def holder_pair(
    base: BetaParam, density_or_m, x, y, alphas: Sequence[float], depth: Optional[int] = None
) -> list[HolderSample]:
    """The Hölder quotient and its bound for one explicit pair, one sample per exponent."""
    x, ex = _exact_point(base, x)
    y, ey = _exact_point(base, y)
    f = base.field
    c = f.sign(f.sub(ey, ex))
    if c == 0:
        raise SeparationNotFound("x = y has no separation time")
    delta = f.reduce(f.sub(ex, ey) if c < 0 else f.sub(ey, ex))
    M = _m_of(density_or_m)
    dmin = float(base.to_enclosure(delta).lower())
    ctx = _make_context(base, M, x, alphas, depth, dmin, 2 * dmin, 0, "both")
    return _sample_at(ctx, 0, "left" if c < 0 else "right", delta)


def _probe_chunk(args):
    ctx, idx = args
    return [_probe_one(ctx, i) for i in idx]


def holder_probe_multi(
    base: BetaParam,
    density_or_m,
    x,
    alphas: Sequence[float],
    n_samples: int,
    delta_min: float,
    delta_max: float,
    seed: int,
    side: str = "both",
    depth: Optional[int] = None,
    workers: int = 1,
) -> list[HolderProbeReport]:
    """Hölder probes at several exponents sharing the same sampled points."""
    if not 0 < delta_min < delta_max:
        raise DomainError("need 0 < delta_min < delta_max")
    if side not in ("both", "left", "right"):
        raise DomainError("side must be both, left or right")
    ctx = _make_context(base, _m_of(density_or_m), x, alphas, depth, delta_min, delta_max, seed, side)
    idx = list(range(n_samples))
    if workers <= 1:
        rows = [_probe_one(ctx, i) for i in idx]
    else:
        chunks = [idx[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex_:
            parts = list(ex_.map(_probe_chunk, [(ctx, c) for c in chunks]))
        rows = [None] * n_samples
        for c, part in zip(chunks, parts):
            for i, r in zip(c, part):
                rows[i] = r
    return [
        HolderProbeReport(base, ctx.x, a, side, seed, tuple(r[k] for r in rows), ctx.ukappa[k])
        for k, a in enumerate(alphas)
    ]


def holder_probe(
    base: BetaParam,
    density_or_m,
    x,
    alpha: float,
    n_samples: int,
    delta_min: float,
    delta_max: float,
    seed: int,
    side: str = "both",
    depth: Optional[int] = None,
    workers: int = 1,
) -> HolderProbeReport:
    """Sample ``|G(x) - G(y)| / |x - y|^alpha`` against the explicit bound chain."""
    return holder_probe_multi(
        base, density_or_m, x, [alpha], n_samples, delta_min, delta_max, seed, side, depth, workers
    )[0]


def holder_csv(rep: HolderProbeReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "side", "y", "delta", "N", "quotient", "quotient_radius", "bound", "bound_radius", "status"])
    for s in rep.samples:
        if s.quotient is None:
            w.writerow([s.index, s.side, s.y, s.delta, s.N if s.N else "", "", "", "", "", s.status])
        else:
            w.writerow(
                [
                    s.index, s.side, s.y, s.delta, s.N,
                    format_mpfr(s.quotient.value, 20), format_radius(s.quotient.radius),
                    format_mpfr(s.bound.value, 20), format_radius(s.bound.radius),
                    s.status,
                ]
            )
    return buf.getvalue()


# -- witness sequences ----------------------------------------------------------


def _enc_max(a: Enclosure, b: Enclosure) -> Enclosure:
    return Enclosure.from_bounds(max(a.lower(), b.lower()), max(a.upper(), b.upper()), max(a.prec, b.prec))


@dataclass(frozen=True)
class WitnessSequence:
    base: BetaParam
    x: Enclosure
    M: Enclosure
    ones: tuple  # l(1) < l(2) < ...
    truncations: tuple  # x_N as enclosures carrying exact payloads
    quotients_direct: tuple  # |G(x_{N+1}) - G(x_N)| / |x_{N+1} - x_N|
    quotients_signed: tuple  # the same quotient before taking absolute values
    quotients_formula: tuple  # l(N+1) - S_{l(N+1)} / M + 1/M
    statistic: tuple  # running max of l(N) - N / M

    @property
    def N_max(self) -> int:
        return len(self.quotients_direct)

    def rows(self) -> list[dict]:
        out = []
        for N in range(1, self.N_max + 1):
            out.append(
                {
                    "N": N,
                    "l_N": self.ones[N - 1],
                    "x_N": format_mpfr(self.truncations[N - 1].value),
                    "quotient_direct": format_mpfr(self.quotients_direct[N - 1].value, 20),
                    "quotient_direct_radius": format_radius(self.quotients_direct[N - 1].radius),
                    "quotient_formula": format_mpfr(self.quotients_formula[N - 1].value, 20),
                    "quotient_formula_radius": format_radius(self.quotients_formula[N - 1].radius),
                    "statistic": format_mpfr(self.statistic[N - 1].value, 20),
                }
            )
        return out

    def to_dict(self) -> dict:
        return {
            "beta": self.base.label,
            "x": format_mpfr(self.x.value),
            "M": self.M.to_dict(),
            "N_max": self.N_max,
            "rows": self.rows(),
        }


def witness_csv(ws: WitnessSequence) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["N", "l_N", "x_N", "quotient_direct", "quotient_formula", "statistic"]
    w.writerow(cols)
    for r in ws.rows():
        w.writerow([r[c] for c in cols])
    return buf.getvalue()


def _ones_positions(
    base: BetaParam, x: Enclosure, count: int, budget: int, keep_states: bool = False
) -> tuple[list[int], bool, dict]:
    """First ``count`` positions of the digit 1 within ``budget`` digits.

    With ``keep_states`` the exact orbit states at those positions are returned too.
    """
    ones = []
    states = {}
    n = 0
    for d, s in iter_orbit(base, x):
        n += 1
        if d:
            ones.append(n)
            if keep_states:
                states[n] = s
            if len(ones) >= count:
                return ones, False, states
        if isinstance(s, QElem) and not any(s.c):
            return ones, True, states
        if n >= budget:
            break
    return ones, False, states


def witness_sequence(
    base: BetaParam, density_or_m, x, N_max: int, depth: Optional[int] = None
) -> WitnessSequence:
    """Truncations at the digit-1 positions and their G difference quotients.

    The direct quotient differences the digit sums of G at consecutive
    truncations (see :class:`~betatakagi.takagi.AffineG`) and is checked
    against the closed form ``l(N+1) - S_{l(N+1)}/M + 1/M`` for every N.
    """
    if N_max < 1:
        raise DomainError("N_max must be >= 1")
    M = _m_of(density_or_m)
    x, ex = _exact_point(base, x)
    f = base.field
    budget = base.max_depth() if depth is None else depth
    base.check_precision(budget, "witness_sequence")
    ones, terminal, states = _ones_positions(base, x, N_max + 1, budget, keep_states=True)
    if terminal:
        raise DomainError("x is simple: its expansion terminates")
    if len(ones) < N_max + 1:
        raise NotEnoughOnes(f"found {len(ones)} ones within {budget} digits, need {N_max + 1}")
    inv_m = 1 / M

    # x_N by accumulating beta^-l(N); cross-checked against x - tau^l(N)(x) beta^-l(N)
    truncs, exact_truncs = [], []
    cur = f.zero()
    pw = f.one()
    last = 0
    for m in ones:
        for _ in range(m - last):
            pw = f.div_beta(pw)
        last = m
        pw = f.reduce(pw)
        cur = f.reduce(f.add(cur, pw))
        other = f.sub(ex, f.mul(states[m], pw))
        if f.sign(f.sub(cur, other)) != 0:
            raise InvariantViolation(f"truncation mismatch at l = {m}")
        exact_truncs.append(cur)
        truncs.append(base.to_enclosure(cur))
    for N in range(1, len(ones)):
        e, prev = exact_truncs[N - 1], exact_truncs[N - 2] if N > 1 else None
        if f.sign(f.sub(ex, e)) <= 0 or (prev is not None and f.sign(f.sub(e, prev)) <= 0):
            raise InvariantViolation("truncations are not strictly increasing below x")
        cap = inverse_power(base, ones[N]) / (1 - base.inv_beta)
        if (x - truncs[N - 1]).certainly_gt(cap):
            raise InvariantViolation("|x - x_N| exceeds the geometric tail bound")

    # expansions of the truncations terminate, so G is exact up to rounding
    affine = [affine_from_ones(base, ones[:N], ones[N - 1]) for N in range(1, N_max + 2)]

    direct, signed, formula, stat = [], [], [], []
    running = None
    for N in range(1, N_max + 1):
        m = ones[N]
        dg: AffineG = affine[N] - affine[N - 1]
        dx = f.reduce(f.sub(exact_truncs[N], exact_truncs[N - 1]))
        if f.sign(f.sub(dx, _inv_power_exact(base, m))) != 0:
            raise InvariantViolation("x_{N+1} - x_N differs from beta^-l(N+1)")
        sq = dg.value(M) / base.to_enclosure(dx)
        fq = m - (N + 1) * inv_m + inv_m
        if not sq.overlaps(fq):
            raise InvariantViolation(f"witness identity fails at N={N}")
        signed.append(sq)
        direct.append(abs(sq))
        formula.append(fq)
        s = ones[N - 1] - N * inv_m
        running = s if running is None else _enc_max(running, s)
        stat.append(running)
    return WitnessSequence(
        base, x, M, tuple(ones), tuple(truncs), tuple(direct), tuple(signed), tuple(formula), tuple(stat)
    )


@dataclass(frozen=True)
class LipschitzStatistic:
    max_stat: Enclosure
    argmax_N: int
    trace: tuple  # (N, l(N), l(N) - N/M)

    def to_dict(self) -> dict:
        return {
            "max_stat": self.max_stat.to_dict(),
            "argmax_N": self.argmax_N,
            "n_ones": len(self.trace),
        }


def lipschitz_statistic(base: BetaParam, density_or_m, x, depth: int) -> LipschitzStatistic:
    """``max_{N : l(N) <= depth} (l(N) - S_{l(N)} / M)``; note ``S_{l(N)} = N``."""
    M = _m_of(density_or_m)
    x, _ = _exact_point(base, x)
    base.check_precision(depth, "lipschitz_statistic")
    ones, _, _ = _ones_positions(base, x, depth + 1, depth)
    if not ones:
        raise NotEnoughOnes(f"no digit 1 within {depth} digits")
    inv_m = 1 / M
    trace = []
    best, arg = None, 0
    for N, l in enumerate(ones, start=1):
        s = l - N * inv_m
        trace.append((N, l, s))
        # a new argmax needs a certain improvement; ties widen the maximum
        if best is None or s.certainly_gt(best):
            best, arg = s, N
        elif not s.certainly_lt(best):
            best = _enc_max(best, s)
    return LipschitzStatistic(best, arg, tuple(trace))
