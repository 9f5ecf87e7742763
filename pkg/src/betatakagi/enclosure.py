"""Ball arithmetic on top of gmpy2.

An :class:`Enclosure` is a midpoint ``value`` (an mpfr at working precision)
and a ``radius`` (a 64-bit mpfr, always an upper bound) such that the true
quantity lies in ``[value - radius, value + radius]``.  Every operation
rounds the midpoint to nearest and folds the rounding error into the radius
using upward-rounded arithmetic, so enclosures never shrink below the truth.

Enclosures may additionally carry an ``exact`` payload (a ``Fraction`` or an
element of an exact number field).  Arithmetic between enclosures drops the
payload; it is maintained explicitly by the dynamics code, which uses it only
to settle decisions a ball cannot (branch points, exact equalities).
"""
from __future__ import annotations

import threading
from fractions import Fraction
from typing import Any, Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

RADIUS_PREC = 64

_local = threading.local()


def _contexts() -> dict:
    d = getattr(_local, "ctx", None)
    if d is None:
        d = _local.ctx = {}
    return d


def ctx_near(p: int):
    key = ("n", p)
    c = _contexts().get(key)
    if c is None:
        c = _contexts()[key] = gmpy2.context(precision=p)
    return c


def ctx_down(p: int):
    key = ("d", p)
    c = _contexts().get(key)
    if c is None:
        c = _contexts()[key] = gmpy2.context(precision=p, round=gmpy2.RoundDown)
    return c


def ctx_up(p: int = RADIUS_PREC):
    key = ("u", p)
    c = _contexts().get(key)
    if c is None:
        c = _contexts()[key] = gmpy2.context(precision=p, round=gmpy2.RoundUp)
    return c


_ZERO = mpfr(0)

Number = Union[int, Fraction, "Enclosure"]


def _slack(v: mpfr, p: int) -> mpfr:
    # round-to-nearest error is at most half an ulp <= |v| 2^-p
    up = ctx_up()
    return up.mul_2exp(up.abs(v), -p)


def _round_near(op: str, p: int, *args) -> tuple[mpfr, mpfr]:
    """Apply ``op`` at precision p; return (result, rounding error bound)."""
    c = ctx_near(p)
    c.clear_flags()
    v = getattr(c, op)(*args)
    if c.inexact:
        return v, _slack(v, p)
    return v, _ZERO


def _max(a: mpfr, b: mpfr) -> mpfr:
    return a if a >= b else b


class Enclosure:
    """A certified real ball ``value +- radius``.

    Instances are treated as immutable.
    """

    __slots__ = ("value", "radius", "exact")

    def __init__(self, value: mpfr, radius: mpfr = _ZERO, exact: Any = None) -> None:
        if radius < 0:
            raise ValueError("negative radius")
        self.value = value
        self.radius = radius
        self.exact = exact

    # -- construction ---------------------------------------------------
    @classmethod
    def point(cls, q: Union[int, Fraction, str], prec: int) -> "Enclosure":
        """Exact rational ``q`` rounded to ``prec`` bits; keeps ``q`` as payload."""
        if isinstance(q, str):
            q = Fraction(q.strip())
        q = Fraction(q)
        v, err = _round_near("add", prec, _ZERO, mpq(q.numerator, q.denominator))
        return cls(v, err, q)

    @classmethod
    def from_scaled_ints(cls, lo: int, hi: int, shift: int, prec: int, exact: Any = None) -> "Enclosure":
        """Ball covering ``[lo, hi] * 2**-shift`` (lo <= hi integers)."""
        if lo > hi:
            raise ValueError("lo > hi")
        v, err = _round_near("mul_2exp", prec, mpz(lo + hi), -(shift + 1))
        up = ctx_up()
        half_width = up.mul_2exp(up.plus(mpz(hi - lo)), -(shift + 1))
        return cls(v, up.add(half_width, err), exact)

    @classmethod
    def from_bounds(cls, lo: mpfr, hi: mpfr, prec: int) -> "Enclosure":
        """Smallest convenient ball containing the closed interval [lo, hi]."""
        if lo > hi:
            raise ValueError("lo > hi")
        c = ctx_near(prec)
        mid = c.mul_2exp(c.add(lo, hi), -1)
        up = ctx_up()
        r = _max(up.sub(hi, mid), up.sub(mid, lo))
        return cls(mid, r)

    @classmethod
    def coerce(cls, x: Number, prec: int) -> "Enclosure":
        if isinstance(x, Enclosure):
            return x
        return cls.point(x, prec)

    # -- basic queries --------------------------------------------------
    @property
    def prec(self) -> int:
        return self.value.precision

    def lower(self) -> mpfr:
        return ctx_down(self.prec).sub(self.value, self.radius)

    def upper(self) -> mpfr:
        return ctx_up(self.prec).add(self.value, self.radius)

    def is_exact(self) -> bool:
        return self.radius == 0

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        return f"Enclosure({format_mpfr(self.value, 20)} +- {format_radius(self.radius)})"

    # -- comparisons (certain answers only) -----------------------------
    def certainly_lt(self, other: Number) -> bool:
        other = Enclosure.coerce(other, self.prec)
        return self.upper() < other.lower()

    def certainly_gt(self, other: Number) -> bool:
        other = Enclosure.coerce(other, self.prec)
        return self.lower() > other.upper()

    def certainly_le(self, other: Number) -> bool:
        other = Enclosure.coerce(other, self.prec)
        return self.upper() <= other.lower()

    def certainly_ge(self, other: Number) -> bool:
        other = Enclosure.coerce(other, self.prec)
        return self.lower() >= other.upper()

    def overlaps(self, other: "Enclosure") -> bool:
        return not (self.certainly_lt(other) or self.certainly_gt(other))

    def contains(self, q: Union[int, Fraction, mpfr]) -> bool:
        if isinstance(q, Fraction):
            q = mpq(q.numerator, q.denominator)
        return self.lower() <= q <= self.upper()

    # -- arithmetic -----------------------------------------------------
    def _binary_prec(self, other: "Enclosure") -> int:
        return max(self.prec, other.prec)

    def __add__(self, other: Number) -> "Enclosure":
        other = Enclosure.coerce(other, self.prec)
        p = self._binary_prec(other)
        v, err = _round_near("add", p, self.value, other.value)
        up = ctx_up()
        return Enclosure(v, up.add(up.add(self.radius, other.radius), err))

    __radd__ = __add__

    def __sub__(self, other: Number) -> "Enclosure":
        other = Enclosure.coerce(other, self.prec)
        p = self._binary_prec(other)
        v, err = _round_near("sub", p, self.value, other.value)
        up = ctx_up()
        return Enclosure(v, up.add(up.add(self.radius, other.radius), err))

    def __rsub__(self, other: Number) -> "Enclosure":
        return Enclosure.coerce(other, self.prec) - self

    def __neg__(self) -> "Enclosure":
        return Enclosure(ctx_near(self.prec).minus(self.value), self.radius)

    def __mul__(self, other: Number) -> "Enclosure":
        other = Enclosure.coerce(other, self.prec)
        p = self._binary_prec(other)
        v, err = _round_near("mul", p, self.value, other.value)
        up = ctx_up()
        r = up.add(up.mul(up.abs(self.value), other.radius), up.mul(up.abs(other.value), self.radius))
        if self.radius and other.radius:
            r = up.add(r, up.mul(self.radius, other.radius))
        return Enclosure(v, up.add(r, err))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Enclosure":
        other = Enclosure.coerce(other, self.prec)
        p = self._binary_prec(other)
        dn = ctx_down(RADIUS_PREC)
        den = dn.sub(dn.abs(other.value), other.radius)
        if den <= 0:
            raise ZeroDivisionError("divisor enclosure contains zero")
        v, err = _round_near("div", p, self.value, other.value)
        up = ctx_up()
        num = up.add(self.radius, up.mul(up.add(up.abs(v), err), other.radius))
        return Enclosure(v, up.add(up.div(num, den), err))

    def __rtruediv__(self, other: Number) -> "Enclosure":
        return Enclosure.coerce(other, self.prec) / self

    def mul_2exp(self, k: int) -> "Enclosure":
        """Exact scaling by 2**k."""
        c = ctx_near(self.prec)
        return Enclosure(c.mul_2exp(self.value, k), ctx_up().mul_2exp(self.radius, k))

    def __abs__(self) -> "Enclosure":
        if self.value >= 0 and self.lower() >= 0:
            return Enclosure(self.value, self.radius)
        if self.upper() <= 0:
            return -self
        hi = ctx_up(self.prec).add(ctx_near(self.prec).abs(self.value), self.radius)
        return Enclosure.from_bounds(_ZERO, hi, self.prec)

    def nonneg(self) -> "Enclosure":
        """Enclosure of max(0, x)."""
        if self.lower() >= 0:
            return self
        if self.upper() <= 0:
            return Enclosure(mpfr(0, self.prec), _ZERO)
        return Enclosure.from_bounds(_ZERO, self.upper(), self.prec)

    def clip(self, lo: Number = 0, hi: Number = 1) -> "Enclosure":
        """Intersect with ``[lo, hi]``; ValueError if the intersection is empty."""
        p = self.prec
        lo_b = Enclosure.coerce(lo, p).lower()
        hi_b = Enclosure.coerce(hi, p).upper()
        a, b = self.lower(), self.upper()
        if a >= lo_b and b <= hi_b:
            return self
        a, b = _max(a, lo_b), (b if b <= hi_b else hi_b)
        if a > b:
            raise ValueError("empty intersection")
        out = Enclosure.from_bounds(a, b, p)
        out.exact = self.exact
        return out

    def hull(self, other: "Enclosure") -> "Enclosure":
        a = min(self.lower(), other.lower())
        b = max(self.upper(), other.upper())
        return Enclosure.from_bounds(a, b, self._binary_prec(other))

    def log(self) -> "Enclosure":
        """Natural logarithm; ValueError unless the ball is strictly positive."""
        lo = self.lower()
        if lo <= 0:
            raise ValueError("log of a non-positive enclosure")
        p = self.prec
        return Enclosure.from_bounds(ctx_down(p).log(lo), ctx_up(p).log(self.upper()), p)

    def pow(self, exponent: Union[float, int, mpfr]) -> "Enclosure":
        """``x**a`` for a strictly positive ball and an exactly known real ``a``."""
        lo = self.lower()
        if lo <= 0:
            raise ValueError("pow of a non-positive enclosure")
        p = self.prec
        if isinstance(exponent, int):
            a = mpz(exponent)
        elif isinstance(exponent, float):
            a = mpfr(exponent, 64)  # exact: floats carry 53 bits
        else:
            a = exponent
        hi = self.upper()
        if a < 0:
            lo, hi = hi, lo
        return Enclosure.from_bounds(ctx_down(p).pow(lo, a), ctx_up(p).pow(hi, a), p)

    def round_to(self, prec: int) -> "Enclosure":
        """Re-express at a different precision (outward)."""
        if prec == self.prec:
            return self
        v, err = _round_near("plus", prec, self.value)
        return Enclosure(v, ctx_up().add(self.radius, err), self.exact)

    # -- output ---------------------------------------------------------
    def to_dict(self) -> dict:
        return {"value": format_mpfr(self.value), "radius": format_radius(self.radius)}


def format_mpfr(v: mpfr, digits: int | None = None) -> str:
    """Deterministic scientific-notation decimal string for an mpfr.

    ``digits`` defaults to enough significant digits to round-trip the
    binary precision of ``v``.
    """
    if gmpy2.is_nan(v):
        return "nan"
    if gmpy2.is_infinite(v):
        return "inf" if v > 0 else "-inf"
    if digits is None:
        digits = int(v.precision * 0.30103) + 2
    if v == 0:
        return "0"
    mant, exp, _ = v.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    mant = mant.rstrip("0") or "0"
    head, tail = mant[0], mant[1:]
    body = f"{head}.{tail}" if tail else head
    return f"{sign}{body}e{exp - 1:+d}"


def format_radius(r: mpfr, digits: int = 6) -> str:
    """Decimal upper bound for a radius (last digit bumped up by one unit)."""
    if r == 0:
        return "0"
    mant, exp, _ = r.digits(10, digits)
    m = int(mant) + 1
    e = exp - digits
    s = str(m)
    e += len(s) - 1
    return f"{s[0]}.{s[1:]}e{e:+d}" if len(s) > 1 else f"{s}e{e:+d}"


def add_tail(x: Enclosure, tail: mpfr) -> Enclosure:
    """Ball covering ``x + [0, tail]`` for a one-sided nonnegative remainder."""
    if not tail:
        return x
    up = ctx_up()
    half = up.mul_2exp(tail, -1)
    return x + Enclosure(half, half)


def widen(x: Enclosure, r: mpfr) -> Enclosure:
    """Ball covering ``x + [-r, r]``."""
    if not r:
        return x
    return Enclosure(x.value, ctx_up().add(x.radius, r), x.exact)
