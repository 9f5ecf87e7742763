"""The beta-map, greedy digits, orbits and separation times.

Points are :class:`~betatakagi.enclosure.Enclosure` balls.  When a point
carries an exact payload (a rational, or an element of Q(beta) for the
named algebraic bases) the orbit is followed exactly and every branch
decision is certain; the returned balls are rigorous shadows of the exact
orbit.  Points without a payload are iterated by ball arithmetic alone and
fail loudly (:class:`AmbiguousBranch`) when a ball straddles 1/beta.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .enclosure import Enclosure
from .errors import AmbiguousBranch, DomainError, InadmissibleDigits, InsufficientPrecision
from .field import BetaField, QElem
from .rng import uniform_bits

GUARD_BITS = 64
MIN_PRECISION = 64

# name -> (integer polynomial, low -> high coefficients)
NAMED_BASES = {
    "golden": (-1, -1, 1),
    "sqrt2": (-2, 0, 1),
    "tribonacci": (-1, -1, -1, 1),
    "plastic": (-1, -1, 0, 1),
    "supergolden": (-1, 0, -1, 1),
}


@dataclass(frozen=True, eq=False)
class BetaParam:
    """A validated base ``1 < beta <= 2`` together with the working precision."""

    label: str
    precision_bits: int
    field: BetaField = dc_field(repr=False)
    beta: Enclosure = dc_field(repr=False)
    inv_beta: Enclosure = dc_field(repr=False)
    log2_beta: float = dc_field(repr=False)

    @classmethod
    def parse(cls, text: Union[str, int, Fraction], precision_bits: int = 256) -> "BetaParam":
        """Build from a decimal/fraction literal or a named constant (``golden`` ...)."""
        if precision_bits < MIN_PRECISION:
            raise DomainError(f"precision_bits must be >= {MIN_PRECISION}")
        label = str(text).strip()
        key = label.lower()
        if key in NAMED_BASES:
            f = BetaField(NAMED_BASES[key], (Fraction(1), Fraction(2)), key)
        else:
            try:
                q = Fraction(label)
            except (ValueError, ZeroDivisionError):
                raise DomainError(f"cannot parse beta {label!r}") from None
            if not (1 < q <= 2):
                raise DomainError(f"beta must lie in (1, 2], got {label}")
            f = BetaField((-q.numerator, q.denominator), (q, q), label)
        b = f.beta_enclosure(precision_bits)
        if not (b.certainly_gt(1) and b.certainly_le(2)):
            raise DomainError(f"beta must lie in (1, 2], got {label}")
        inv = f.to_enclosure(f.inv_beta(), precision_bits)
        return cls(label, precision_bits, f, b, inv, math.log2(float(b.value)))

    def with_precision(self, precision_bits: int) -> "BetaParam":
        return BetaParam.parse(self.label, precision_bits)

    @property
    def key(self) -> tuple:
        return (self.field.poly, self.field.bracket, self.precision_bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, BetaParam) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    @property
    def is_two(self) -> bool:
        return self.field.is_rational and self.field.rational_value() == 2

    def required_bits(self, depth: int) -> int:
        return math.ceil(depth * self.log2_beta) + GUARD_BITS

    def max_depth(self) -> int:
        """Largest depth allowed by the precision contract."""
        return max(0, int((self.precision_bits - GUARD_BITS) / self.log2_beta))

    def check_precision(self, depth: int, what: str = "") -> None:
        need = self.required_bits(depth)
        if self.precision_bits < need:
            raise InsufficientPrecision(need, self.precision_bits, what or f"depth {depth}")

    def element(self, x) -> QElem:
        return self.field.coerce(x)

    def to_enclosure(self, e: QElem) -> Enclosure:
        return self.field.to_enclosure(e, self.precision_bits)


def bits_for_depth(beta: Union[str, BetaParam], depth: int) -> int:
    """Smallest precision satisfying the contract for ``depth`` steps."""
    label = beta.label if isinstance(beta, BetaParam) else beta
    b = BetaParam.parse(label, 128)
    return b.required_bits(depth)


# -- points -----------------------------------------------------------------


def point(base: BetaParam, x: Union[str, int, Fraction, QElem]) -> Enclosure:
    """An exact point of [0, 1] as an enclosure with exact payload."""
    if isinstance(x, str):
        try:
            x = Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"cannot parse point {x!r}") from None
    e = base.element(x)
    if base.field.sign(e) < 0 or base.field.cmp_int(e, 1) > 0:
        raise DomainError("point outside [0, 1]")
    return base.to_enclosure(e)


def ball(base: BetaParam, value: Union[str, Fraction], radius: Union[str, Fraction] = 0) -> Enclosure:
    """An inexact point: a ball with no exact payload."""
    v = Enclosure.point(Fraction(value), base.precision_bits)
    r = Enclosure.point(Fraction(radius), base.precision_bits)
    return Enclosure(v.value, r.upper() + v.radius)


def random_point(base: BetaParam, gen: np.random.Generator, bits: Optional[int] = None) -> Enclosure:
    """Uniform dyadic point k / 2^bits in (0, 1) drawn from ``gen``."""
    bits = bits or base.precision_bits
    while True:
        k = uniform_bits(gen, bits)
        if k:
            return point(base, Fraction(k, 1 << bits))


def _exact_of(base: BetaParam, x: Enclosure) -> Optional[QElem]:
    e = x.exact
    if e is None:
        return None
    if isinstance(e, QElem):
        if e.field != base.field:
            raise DomainError("point belongs to a different base field")
        return e
    return base.field.coerce(e)


def _check_unit(base: BetaParam, x: Enclosure, e: Optional[QElem]) -> Enclosure:
    if e is not None:
        if base.field.sign(e) < 0 or base.field.cmp_int(e, 1) > 0:
            raise DomainError("point outside [0, 1]")
        return x
    try:
        return x.clip(0, 1)
    except ValueError:
        raise DomainError("point outside [0, 1]") from None


# -- one step -----------------------------------------------------------------


def _exact_step(f: BetaField, e: QElem) -> tuple[int, QElem]:
    y = f.mul_beta(e)
    if f.cmp_int(y, 1) >= 0:
        # beta = 2, x = 1 gives y = 2 and tau(1) = 1: the constant-1 convention
        return 1, f.add_int(y, -1)
    return 0, y


def _ball_step(base: BetaParam, x: Enclosure, index: int) -> tuple[int, Enclosure]:
    y = base.beta * x
    if y.lower() >= 1:
        d = 1
    elif y.upper() < 1:
        d = 0
    else:
        raise AmbiguousBranch(index)
    t = y - d if d else y
    return d, t.clip(0, 1)


def step(base: BetaParam, x: Enclosure) -> tuple[int, Enclosure]:
    """One application of the beta-map: ``(digit [beta x], tau(x))``."""
    e = _exact_of(base, x)
    x = _check_unit(base, x, e)
    if e is not None:
        d, e2 = _exact_step(base.field, e)
        return d, base.to_enclosure(e2)
    return _ball_step(base, x, 1)


def tau(base: BetaParam, x: Enclosure) -> Enclosure:
    """``tau_beta(x) = beta x - [beta x]``."""
    return step(base, x)[1]


def iter_orbit(base: BetaParam, x: Enclosure) -> Iterator[tuple[int, Union[QElem, Enclosure]]]:
    """Lazily yield ``(g_n, state_n)`` for n = 1, 2, ...

    ``state_n`` is the exact element tau^n(x) when available, otherwise its
    ball.  Ball iteration raises :class:`AmbiguousBranch` with the step index.
    """
    e = _exact_of(base, x)
    x = _check_unit(base, x, e)
    if e is not None:
        f = base.field
        n = 0
        while True:
            n += 1
            if not any(e.c):
                yield 0, e
                continue
            d, e = _exact_step(f, e)
            yield d, e
    n = 0
    while True:
        n += 1
        d, x = _ball_step(base, x, n)
        yield d, x


# -- traces -------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitTrace:
    base: BetaParam
    x0: Enclosure
    points: tuple
    digits: tuple
    ambiguous_at: Optional[int] = None
    exact: bool = False

    @property
    def certified(self) -> bool:
        return self.ambiguous_at is None


def orbit(base: BetaParam, x: Enclosure, n: int, strict: bool = True) -> OrbitTrace:
    """Orbit ``tau^0(x) .. tau^n(x)`` with digits ``g_1 .. g_n``.

    With ``strict=False`` an ambiguous branch truncates the trace instead of
    raising, and ``ambiguous_at`` records the failing step.
    """
    if n < 0:
        raise DomainError("negative depth")
    base.check_precision(n, "orbit")
    e = _exact_of(base, x)
    x = _check_unit(base, x, e)
    pts = [x]
    digs = []
    it = iter_orbit(base, x)
    try:
        for _ in range(n):
            d, s = next(it)
            digs.append(d)
            pts.append(base.to_enclosure(s) if e is not None else s)
    except AmbiguousBranch as exc:
        trace = OrbitTrace(base, x, tuple(pts), tuple(digs), exc.index, e is not None)
        if strict:
            exc.trace = trace
            raise
        return trace
    return OrbitTrace(base, x, tuple(pts), tuple(digs), None, e is not None)


class DigitSource(enum.Enum):
    COMPUTED = "computed-from-point"
    USER = "user-supplied"


@dataclass(frozen=True)
class GreedyDigits:
    """Prefix ``g_1 .. g_depth`` of a greedy expansion.

    ``terminal`` records that every digit past ``depth`` is known to be 0
    (digit-list inputs, or an exact orbit that reached 0).
    """

    base: BetaParam
    digits: tuple
    source: DigitSource = DigitSource.COMPUTED
    certified: bool = True
    terminal: bool = False

    @property
    def depth(self) -> int:
        return len(self.digits)

    def __str__(self) -> str:
        return "".join(map(str, self.digits))

    @classmethod
    def from_user(cls, base: BetaParam, digits: Union[str, Sequence[int]]) -> "GreedyDigits":
        """Validate a digit list by regeneration; raises InadmissibleDigits."""
        if isinstance(digits, str):
            digits = [int(ch) for ch in digits.strip() if ch in "01"]
        ds = tuple(int(d) for d in digits)
        if any(d not in (0, 1) for d in ds):
            raise InadmissibleDigits("digits must be 0 or 1")
        cand = cls(base, ds, DigitSource.USER, True, True)
        x = synthesize(base, cand)
        try:
            back = digits_of(base, x, len(ds))
        except DomainError:
            raise InadmissibleDigits(f"{cand} sums past 1") from None
        if back.digits != ds:
            raise InadmissibleDigits(f"{cand} is not a greedy {base.label}-expansion")
        return cand


def digits_of(base: BetaParam, x: Enclosure, n: int, strict: bool = True) -> GreedyDigits:
    """The first ``n`` greedy digits of ``x``."""
    if n < 0:
        raise DomainError("negative depth")
    base.check_precision(n, "digits")
    out = []
    it = iter_orbit(base, x)
    state = None
    try:
        for _ in range(n):
            d, state = next(it)
            out.append(d)
    except AmbiguousBranch:
        if strict:
            raise
        return GreedyDigits(base, tuple(out), DigitSource.COMPUTED, False, False)
    terminal = isinstance(state, QElem) and not any(state.c)
    if n == 0:
        e = _exact_of(base, x)
        terminal = e is not None and not any(e.c)
    return GreedyDigits(base, tuple(out), DigitSource.COMPUTED, True, terminal)


# short alias; ``digits`` is also a common local variable name
digits = digits_of


def synthesize_elem(base: BetaParam, ds: Sequence[int]) -> QElem:
    f = base.field
    e = f.zero()
    for d in reversed(ds):
        if d:
            e = f.add_int(e, 1)
        e = f.div_beta(e)
    return f.reduce(e)


def synthesize(base: BetaParam, d: Union[GreedyDigits, Sequence[int]]) -> Enclosure:
    """``sum d_k beta^-k`` exactly (the truncation point), as an enclosure."""
    ds = d.digits if isinstance(d, GreedyDigits) else tuple(d)
    if any(x not in (0, 1) for x in ds):
        raise DomainError("digits must be 0 or 1")
    return base.to_enclosure(synthesize_elem(base, ds))


def separation_time(base: BetaParam, x: Enclosure, y: Enclosure, max_depth: int) -> Optional[int]:
    """Least ``i <= max_depth`` with ``g_i(x) != g_i(y)``, or None."""
    base.check_precision(max_depth, "separation_time")
    ex, ey = _exact_of(base, x), _exact_of(base, y)
    if ex is not None and ey is not None:
        if base.field.sign(base.field.sub(ex, ey)) == 0:
            raise DomainError("separation time needs distinct points")
    elif not (x.certainly_lt(y) or x.certainly_gt(y)):
        raise DomainError("separation time needs disjoint enclosures")
    itx, ity = iter_orbit(base, x), iter_orbit(base, y)
    for i in range(1, max_depth + 1):
        if next(itx)[0] != next(ity)[0]:
            return i
    return None


class Trilean(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SimpleCheck:
    answer: Trilean
    n0: Optional[int] = None

    def __bool__(self) -> bool:
        return self.answer is Trilean.YES


def is_simple(base: BetaParam, x: Enclosure, depth: int) -> SimpleCheck:
    """Whether ``tau^(n0-1)(x) = 1/beta`` for some ``n0 <= depth``."""
    if depth < 1:
        raise DomainError("depth must be >= 1")
    f = base.field
    e = _exact_of(base, x)
    x = _check_unit(base, x, e)
    if e is not None:
        inv = f.inv_beta()
        cur = e
        for n0 in range(1, depth + 1):
            if not any(cur.c):
                return SimpleCheck(Trilean.NO)
            if f.sign(f.sub(cur, inv)) == 0:
                return SimpleCheck(Trilean.YES, n0)
            cur = _exact_step(f, cur)[1]
        return SimpleCheck(Trilean.NO)
    cur = x
    for n0 in range(1, depth + 1):
        if cur.overlaps(base.inv_beta):
            return SimpleCheck(Trilean.UNKNOWN, n0)
        cur = _ball_step(base, cur, n0)[1]
    return SimpleCheck(Trilean.NO)


def exact_state(base: BetaParam, x: Enclosure) -> Optional[QElem]:
    """Exact payload of ``x`` as an element of the base field (or None)."""
    return _exact_of(base, x)
