"""Exact arithmetic in the field of rationals extended by square roots of square-free integers.

A SurdNumber is a finite sum  sum_m  q_m * sqrt(m)  with rational q_m and
square-free radicands m >= 1 (m = 1 holds the rational part).  Addition,
multiplication and division are exact; there is no floating point anywhere.
"""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Union

from .errors import NonSquarefreeRadicandError

#: Largest radicand accepted for square-free screening.
RADICAND_CAP = 10**6

RationalLike = Union[int, Fraction]


def square_free_split(n: int) -> tuple[int, int]:
    """Split n >= 1 as n = s*s * m with m square-free; returns (s, m)."""
    if n < 1:
        raise NonSquarefreeRadicandError(f"radicand must be positive, got {n}")
    if n > RADICAND_CAP:
        raise NonSquarefreeRadicandError(
            f"radicand {n} exceeds the square-free screening cap {RADICAND_CAP}"
        )
    s, m = 1, 1
    rest = n
    d = 2
    while d * d <= rest:
        if rest % d == 0:
            count = 0
            while rest % d == 0:
                rest //= d
                count += 1
            s *= d ** (count // 2)
            if count % 2:
                m *= d
        d += 1 if d == 2 else 2
    m *= rest
    return s, m


class SurdNumber:
    """An exact element of the multi-quadratic field Q(sqrt(2), sqrt(3), ...)."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[int, RationalLike] | None = None) -> None:
        clean: dict[int, Fraction] = {}
        if coeffs:
            for rad, q in coeffs.items():
                q = Fraction(q)
                if q == 0:
                    continue
                s, m = square_free_split(rad)
                clean[m] = clean.get(m, Fraction(0)) + q * s
        self._coeffs = {m: q for m, q in clean.items() if q != 0}

    # -- constructors -------------------------------------------------

    @classmethod
    def from_rational(cls, q: RationalLike) -> SurdNumber:
        return cls({1: Fraction(q)})

    @classmethod
    def sqrt_int(cls, n: int) -> SurdNumber:
        """Exact square root of a nonnegative integer, normalized to square-free form."""
        if n == 0:
            return cls()
        s, m = square_free_split(n)
        return cls({m: Fraction(s)})

    # -- inspection ---------------------------------------------------

    @property
    def coefficients(self) -> dict[int, Fraction]:
        return dict(self._coeffs)

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def is_rational(self) -> bool:
        return all(m == 1 for m in self._coeffs)

    @property
    def rational_part(self) -> Fraction:
        return self._coeffs.get(1, Fraction(0))

    def radicands(self) -> Iterable[int]:
        return sorted(self._coeffs)

    # -- ring operations ----------------------------------------------

    def _coerce(self, other: object) -> SurdNumber | None:
        if isinstance(other, SurdNumber):
            return other
        if isinstance(other, (int, Fraction)):
            return SurdNumber.from_rational(other)
        return None

    def __add__(self, other: int | Fraction | SurdNumber) -> SurdNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self._coeffs)
        for m, q in o._coeffs.items():
            out[m] = out.get(m, Fraction(0)) + q
        return SurdNumber(out)

    __radd__ = __add__

    def __neg__(self) -> SurdNumber:
        return SurdNumber({m: -q for m, q in self._coeffs.items()})

    def __sub__(self, other: int | Fraction | SurdNumber) -> SurdNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: int | Fraction | SurdNumber) -> SurdNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other: int | Fraction | SurdNumber) -> SurdNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for m1, q1 in self._coeffs.items():
            for m2, q2 in o._coeffs.items():
                g = gcd(m1, m2)
                m = (m1 // g) * (m2 // g)
                q = q1 * q2 * g
                out[m] = out.get(m, Fraction(0)) + q
        return SurdNumber(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> SurdNumber:
        if n < 0:
            return self.inverse() ** (-n)
        acc = SurdNumber.from_rational(1)
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def inverse(self) -> SurdNumber:
        """Exact multiplicative inverse, by successive conjugation over one prime at a time."""
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero surd")
        if self.is_rational:
            return SurdNumber.from_rational(1 / self.rational_part)
        p = self._pivot_prime()
        plain: dict[int, Fraction] = {}
        carried: dict[int, Fraction] = {}
        for m, q in self._coeffs.items():
            if m % p == 0:
                carried[m // p] = q
            else:
                plain[m] = q
        a = SurdNumber(plain)
        b = SurdNumber(carried)
        # self = a + sqrt(p)*b, with a and b free of sqrt(p); the conjugate
        # product a^2 - p*b^2 lives in the smaller field, so we can recurse.
        denom = a * a - SurdNumber.from_rational(p) * b * b
        inv_denom = denom.inverse()
        return (a - SurdNumber.sqrt_int(p) * b) * inv_denom

    def _pivot_prime(self) -> int:
        rad = max(m for m in self._coeffs if m > 1)
        d = 2
        while rad % d:
            d += 1 if d == 2 else 2
        return d

    def __truediv__(self, other: int | Fraction | SurdNumber) -> SurdNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: int | Fraction | SurdNumber) -> SurdNumber:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    # -- comparison ---------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = SurdNumber.from_rational(other)
        if not isinstance(other, SurdNumber):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(frozenset(self._coeffs.items()))

    def is_negative(self) -> bool:
        return not self.is_zero and self.to_decimal(30) < 0

    # -- numeric rendering ---------------------------------------------

    def to_decimal(self, precision: int = 28) -> Decimal:
        """Decimal approximation computed at the requested working precision."""
        with localcontext() as ctx:
            ctx.prec = precision + 10
            total = Decimal(0)
            for m, q in self._coeffs.items():
                part = Decimal(q.numerator) / Decimal(q.denominator)
                if m > 1:
                    part *= Decimal(m).sqrt()
                total += part
            return +total

    def decimal_str(self, significant: int = 9) -> str:
        """Decimal string rounded to the given number of significant figures.

        Exact trailing zeros are trimmed, so exact integers print without
        a fraction part ("0", "2").
        """
        if significant < 1:
            raise ValueError("significant figures must be >= 1")
        if self.is_zero:
            return "0"
        d = self.to_decimal(significant + 15)
        quantum = Decimal(1).scaleb(d.adjusted() - significant + 1)
        with localcontext() as ctx:
            ctx.prec = significant + 20
            q = d.quantize(quantum, rounding=ROUND_HALF_EVEN)
        text = format(q, "f")
        if "." in text:
            text = text.rstrip("0").rstrip(".")
        return text

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts: list[str] = []
        for m in sorted(self._coeffs):
            q = self._coeffs[m]
            mag = abs(q)
            if m == 1:
                body = str(mag)
            else:
                root = f"sqrt({m})"
                if mag == 1:
                    body = root
                elif mag.denominator == 1:
                    body = f"{mag.numerator}*{root}"
                else:
                    body = f"{mag.numerator}*{root}/{mag.denominator}"
            if not parts:
                parts.append(body if q > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if q > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"SurdNumber({self._coeffs!r})"


ZERO = SurdNumber()
ONE = SurdNumber.from_rational(1)
