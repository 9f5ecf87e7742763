"""Exact arithmetic in the number field Q(beta).

``beta`` is the unique root, inside a given rational bracket, of an
irreducible integer polynomial ``c_0 + c_1 t + ... + c_d t^d``.  Elements are
stored as an integer coefficient vector over the power basis
``1, beta, ..., beta^(d-1)`` together with a positive integer denominator.
Rational bases are the degree-one case ``b t - a``.

Zero testing is exact (irreducibility makes the power basis independent);
signs of nonzero elements are decided by interval evaluation with integer
fixed-point bounds on the powers of beta, refined until conclusive.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

import mpmath

from .enclosure import Enclosure


class QElem:
    """An element ``sum(c[i] beta^i) / den`` of a :class:`BetaField`."""

    __slots__ = ("field", "c", "den")

    def __init__(self, field: "BetaField", c: tuple, den: int) -> None:
        self.field = field
        self.c = c
        self.den = den

    def __add__(self, other):
        return self.field.add(self, self.field.coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.field.sub(self, self.field.coerce(other))

    def __rsub__(self, other):
        return self.field.sub(self.field.coerce(other), self)

    def __mul__(self, other):
        return self.field.mul(self, self.field.coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return QElem(self.field, tuple(-x for x in self.c), self.den)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.field.coerce(other)
        if not isinstance(other, QElem) or other.field != self.field:
            return NotImplemented
        return self.field.sign(self.field.sub(self, other)) == 0

    def __hash__(self):  # pragma: no cover - elements are not meant as keys
        raise TypeError("QElem is unhashable")

    def sign(self) -> int:
        return self.field.sign(self)

    def is_zero(self) -> bool:
        return not any(self.c)

    def to_fraction(self) -> Fraction:
        if self.field.degree != 1:
            raise ValueError("element of a non-rational field")
        return Fraction(self.c[0], self.den)

    def __repr__(self) -> str:
        return f"QElem({self.c}/{self.den} in {self.field.name})"


class BetaField:
    def __init__(self, poly: Sequence[int], bracket: tuple[Fraction, Fraction], name: str = "") -> None:
        poly = [int(x) for x in poly]
        while poly and poly[-1] == 0:
            poly.pop()
        if len(poly) < 2:
            raise ValueError("polynomial must have degree >= 1")
        if poly[-1] < 0:
            poly = [-x for x in poly]
        self.poly = tuple(poly)
        self.degree = len(poly) - 1
        self.name = name or "root of " + str(self.poly)
        lo, hi = Fraction(bracket[0]), Fraction(bracket[1])
        if self._sign_at(lo) * self._sign_at(hi) > 0:
            raise ValueError("bracket does not isolate a root")
        self.bracket = (lo, hi)
        self._root_cache: dict[int, int] = {}
        self._pow_cache: dict[int, tuple[list[int], list[int]]] = {}
        self._invpow_cache: dict[int, tuple[list[int], list[int]]] = {}
        self._inv = None

    # -- identity ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, BetaField) and self.poly == other.poly and self.bracket == other.bracket

    def __hash__(self) -> int:
        return hash((self.poly, self.bracket))

    def __getstate__(self):
        return {"poly": self.poly, "bracket": self.bracket, "name": self.name}

    def __setstate__(self, state):
        self.__init__(state["poly"], state["bracket"], state["name"])

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    def rational_value(self) -> Fraction:
        return Fraction(-self.poly[0], self.poly[1])

    # -- construction -------------------------------------------------------
    def coerce(self, x) -> QElem:
        if isinstance(x, QElem):
            if x.field != self:
                raise ValueError("element of a different field")
            return x
        q = Fraction(x)
        return QElem(self, (q.numerator,) + (0,) * (self.degree - 1), q.denominator)

    def zero(self) -> QElem:
        return self.coerce(0)

    def one(self) -> QElem:
        return self.coerce(1)

    def beta(self) -> QElem:
        if self.degree == 1:
            return self.coerce(self.rational_value())
        return QElem(self, (0, 1) + (0,) * (self.degree - 2), 1)

    def inv_beta(self) -> QElem:
        if self._inv is None:
            self._inv = self.div_beta(self.one())
        return self._inv

    # -- arithmetic ---------------------------------------------------------
    def _norm(self, c: list, den: int) -> QElem:
        if den < 0:
            c = [-x for x in c]
            den = -den
        return QElem(self, tuple(c), den)

    def reduce(self, e: QElem) -> QElem:
        """Divide out the common content of numerator and denominator."""
        g = e.den
        for x in e.c:
            g = gcd(g, x)
            if g == 1:
                return e
        return QElem(self, tuple(x // g for x in e.c), e.den // g)

    def add(self, a: QElem, b: QElem) -> QElem:
        if a.den == b.den:
            return QElem(self, tuple(x + y for x, y in zip(a.c, b.c)), a.den)
        g = gcd(a.den, b.den)
        ma, mb = b.den // g, a.den // g
        return QElem(self, tuple(x * ma + y * mb for x, y in zip(a.c, b.c)), a.den * ma)

    def sub(self, a: QElem, b: QElem) -> QElem:
        return self.add(a, QElem(self, tuple(-y for y in b.c), b.den))

    def add_int(self, a: QElem, k: int) -> QElem:
        return QElem(self, (a.c[0] + k * a.den,) + a.c[1:], a.den)

    def mul_beta(self, e: QElem) -> QElem:
        c, d, p = e.c, self.degree, self.poly
        top = c[d - 1]
        lead = p[d]
        shifted = (0,) + c[:-1]
        if lead == 1:
            new = [s - top * p[i] for i, s in enumerate(shifted)]
            return QElem(self, tuple(new), e.den)
        new = [lead * s - top * p[i] for i, s in enumerate(shifted)]
        return QElem(self, tuple(new), e.den * lead)

    def div_beta(self, e: QElem) -> QElem:
        # beta^-1 = -(c_1 + c_2 beta + ... + c_d beta^(d-1)) / c_0
        c, p = e.c, self.poly
        low = c[0]
        c0 = p[0]
        shifted = c[1:] + (0,)
        new = [c0 * s - low * p[i + 1] for i, s in enumerate(shifted)]
        return self._norm(new, e.den * c0)

    def mul(self, a: QElem, b: QElem) -> QElem:
        d = self.degree
        if d == 1:
            return QElem(self, (a.c[0] * b.c[0],), a.den * b.den)
        prod = [0] * (2 * d - 1)
        for i, x in enumerate(a.c):
            if x:
                for j, y in enumerate(b.c):
                    prod[i + j] += x * y
        den = a.den * b.den
        lead = self.poly[d]
        for k in range(2 * d - 2, d - 1, -1):
            t = prod[k]
            if not t:
                continue
            if lead != 1:
                prod = [lead * v for v in prod]
                den *= lead
                t = prod[k]
            prod[k] = 0
            for i in range(d):
                prod[k - d + i] -= t * self.poly[i] // lead
        return QElem(self, tuple(prod[:d]), den)

    # -- order ----------------------------------------------------------------
    def _sign_at(self, q: Fraction) -> int:
        num, den = q.numerator, q.denominator
        d = self.degree
        v = sum(ci * num**i * den ** (d - i) for i, ci in enumerate(self.poly))
        return (v > 0) - (v < 0)

    def _eval_int_poly(self, b: int, q: int) -> int:
        # sign of p(b / 2^q) scaled by 2^(q d)
        d = self.degree
        return sum(ci * b**i << (q * (d - i)) for i, ci in enumerate(self.poly))

    def root_bits(self, q: int) -> int:
        """Integer B with beta in [B, B+1] * 2^-q."""
        b = self._root_cache.get(q)
        if b is not None:
            return b
        if self.degree == 1:
            r = self.rational_value()
            b = (r.numerator << q) // r.denominator
        else:
            lo, hi = self.bracket
            with mpmath.workprec(q + 64):
                f = lambda t: mpmath.polyval(list(reversed(self.poly)), t)
                mid = (lo + hi) / 2
                approx = mpmath.findroot(f, mpmath.mpf(mid.numerator) / mid.denominator)
                b = int(mpmath.floor(approx * mpmath.mpf(2) ** q))
            if not self._brackets_root(b, q):
                b = self._bisect_root(q)
        self._root_cache[q] = b
        return b

    def _brackets_root(self, b: int, q: int) -> bool:
        lo, hi = self.bracket
        if not (lo * 2**q <= b and (b + 1) <= hi * 2**q):
            return False
        s0 = self._eval_int_poly(b, q)
        s1 = self._eval_int_poly(b + 1, q)
        return s0 == 0 or (s0 > 0) != (s1 > 0)

    def _bisect_root(self, q: int) -> int:
        lo, hi = self.bracket
        a = (lo.numerator << q) // lo.denominator
        b = -((-hi.numerator << q) // hi.denominator)
        sa = self._eval_int_poly(a, q) > 0
        while b - a > 1:
            m = (a + b) // 2
            if (self._eval_int_poly(m, q) > 0) == sa:
                a = m
            else:
                b = m
        return a

    def power_bounds(self, q: int) -> tuple[list[int], list[int]]:
        """Integer bounds ``lo[i] <= beta^i 2^q <= hi[i]`` for ``i < degree``."""
        got = self._pow_cache.get(q)
        if got is not None:
            return got
        b = self.root_bits(q)
        lo, hi = [1 << q], [1 << q]
        for i in range(1, self.degree):
            lo.append(b**i >> (q * (i - 1)))
            hi.append(-((-((b + 1) ** i)) >> (q * (i - 1))))
        self._pow_cache[q] = (lo, hi)
        return lo, hi

    def bounds(self, e: QElem, q: int) -> tuple[int, int]:
        """Integers with ``lo <= (sum c_i beta^i) * 2^q <= hi`` (denominator excluded)."""
        if self.degree == 1:
            return e.c[0] << q, e.c[0] << q
        plo, phi = self.power_bounds(q)
        lo = hi = 0
        for ci, a, b in zip(e.c, plo, phi):
            if ci >= 0:
                lo += ci * a
                hi += ci * b
            else:
                lo += ci * b
                hi += ci * a
        return lo, hi

    def sign(self, e: QElem) -> int:
        c = e.c
        if self.degree == 1:
            x = c[0]
            return (x > 0) - (x < 0)
        if not any(c):
            return 0
        m = max(abs(x).bit_length() for x in c)
        s = m - 100
        if s > 0:
            # floor-truncated coefficients: c_i = t_i 2^s + r_i with 0 <= r_i < 2^s
            plo, phi = self.power_bounds(192)
            lo = hi = 0
            for ci, a, b in zip(c, plo, phi):
                t = ci >> s
                if t >= 0:
                    lo += t * a
                    hi += t * b + b
                else:
                    lo += t * b
                    hi += t * a + b
            if lo > 0:
                return 1
            if hi < 0:
                return -1
        q = max(128, m + 64)
        while True:
            lo, hi = self.bounds(e, q)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            q *= 2

    def cmp_int(self, e: QElem, k: int) -> int:
        """Sign of ``e - k``."""
        return self.sign(self.add_int(e, -k))

    # -- numerics -------------------------------------------------------------
    def to_enclosure(self, e: QElem, prec: int) -> Enclosure:
        """Certified ball of working precision ``prec`` carrying ``e`` as payload."""
        m = max(abs(x).bit_length() for x in e.c)
        if m == 0:
            out = Enclosure.point(0, prec)
            out.exact = e
            return out
        q = 0 if self.degree == 1 else max(64, prec + 16 + m - e.den.bit_length())
        lo, hi = self.bounds(e, q)
        k = prec + 8 + e.den.bit_length() + q - max(abs(lo).bit_length(), 1)
        k = max(k, 0)
        scale = e.den << q
        zlo = (lo << k) // scale
        zhi = -((-hi << k) // scale)
        return Enclosure.from_scaled_ints(zlo, zhi, k, prec, exact=e)

    def beta_enclosure(self, prec: int) -> Enclosure:
        if self.degree == 1:
            return Enclosure.point(self.rational_value(), prec)
        q = prec + 16
        b = self.root_bits(q)
        return Enclosure.from_scaled_ints(b, b + 1, q, prec)

    def inverse_power_bounds(self, n: int, q: int) -> tuple[list[int], list[int]]:
        """``lo[k] <= beta^-k 2^q <= hi[k]`` for ``k = 0..n`` (cached, extended lazily)."""
        got = self._invpow_cache.get(q)
        if got is not None and len(got[0]) > n:
            return got[0], got[1]
        g = 16
        ilo, ihi = self.bounds(self.inv_beta(), q + g)
        den = self.inv_beta().den
        # fold denominator: beta^-1 in [ilo, ihi] / (den 2^(q+g))
        rlo = ilo // den
        rhi = -((-ihi) // den)
        if got is None:
            lo, hi = [1 << (q + g)], [1 << (q + g)]
        else:
            lo, hi = got[2], got[3]
        sh = q + g
        target = max(n, 2 * len(lo) - 1, 64)
        while len(lo) <= target:
            lo.append((lo[-1] * rlo) >> sh)
            hi.append(-((-(hi[-1] * rhi)) >> sh))
        out_lo = [x >> g for x in lo]
        out_hi = [-((-x) >> g) for x in hi]
        self._invpow_cache[q] = (out_lo, out_hi, lo, hi)
        return out_lo, out_hi
