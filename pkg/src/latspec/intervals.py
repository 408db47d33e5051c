"""Outward-rounded rational interval arithmetic.

Supports the certified enclosures needed for torus-system weights:
sin(pi*q) and cos(pi*q) for rational q via argument reduction plus an
alternating Taylor series, with pi pinned between 50-digit rational bounds.
All endpoints are Fractions; rounding, when applied, only ever widens an
interval, so every enclosure stays sound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

Rat = Union[int, Fraction]

_PI_DIGITS = 314159265358979323846264338327950288419716939937510
PI_LO = Fraction(_PI_DIGITS, 10**50)
PI_HI = Fraction(_PI_DIGITS + 1, 10**50)

#: endpoints are rounded onto this grid after transcendental evaluations
_GRID_BITS = 192


@dataclass(frozen=True)
class Iv:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("interval endpoints out of order")

    @classmethod
    def point(cls, q: Rat) -> "Iv":
        q = Fraction(q)
        return cls(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, q: Rat) -> bool:
        return self.lo <= Fraction(q) <= self.hi

    def __add__(self, other: "Iv") -> "Iv":
        return Iv(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Iv") -> "Iv":
        return Iv(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Iv":
        return Iv(-self.hi, -self.lo)

    def __mul__(self, other: "Iv") -> "Iv":
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Iv(min(products), max(products))

    def scale(self, q: Rat) -> "Iv":
        q = Fraction(q)
        if q >= 0:
            return Iv(self.lo * q, self.hi * q)
        return Iv(self.hi * q, self.lo * q)

    def shift(self, q: Rat) -> "Iv":
        q = Fraction(q)
        return Iv(self.lo + q, self.hi + q)

    def square(self) -> "Iv":
        if self.lo >= 0:
            return Iv(self.lo * self.lo, self.hi * self.hi)
        if self.hi <= 0:
            return Iv(self.hi * self.hi, self.lo * self.lo)
        return Iv(Fraction(0), max(self.lo * self.lo, self.hi * self.hi))

    def recip(self) -> "Iv":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return Iv(1 / self.hi, 1 / self.lo)

    def intersect(self, other: "Iv") -> "Iv":
        return Iv(max(self.lo, other.lo), min(self.hi, other.hi))


PI = Iv(PI_LO, PI_HI)


def round_out(iv: Iv, bits: int = _GRID_BITS) -> Iv:
    """Widen endpoints onto a 2**-bits grid to keep denominators bounded."""
    scale = 1 << bits
    lo = Fraction((iv.lo.numerator * scale) // iv.lo.denominator, scale)
    hi_num = -((-iv.hi.numerator * scale) // iv.hi.denominator)
    return Iv(lo, Fraction(hi_num, scale))


def _sin_taylor(x: Iv, terms: int = 14) -> Iv:
    """Enclose sin(x) for 0 <= x <= pi/2 by the alternating series."""
    xsq = round_out(x.square())
    term = x
    total = x
    sign = -1
    fact_arg = 1
    for _ in range(terms):
        fact_arg += 2
        term = round_out(term * xsq).scale(Fraction(1, (fact_arg - 1) * fact_arg))
        total = total + term.scale(sign)
        sign = -sign
    # one extra term bounds the truncation error
    fact_arg += 2
    err = round_out(term * xsq).scale(Fraction(1, (fact_arg - 1) * fact_arg))
    bound = max(abs(err.lo), abs(err.hi))
    out = Iv(total.lo - bound, total.hi + bound)
    return round_out(out.intersect(Iv(Fraction(0), Fraction(1))))


def sinpi(q: Rat) -> Iv:
    """Certified enclosure of sin(pi*q) for rational q."""
    return _sinpi_cached(Fraction(q) % 2)


@lru_cache(maxsize=65536)
def _sinpi_cached(q: Fraction) -> Iv:
    if q > 1:
        return -_sinpi_cached(q - 1)
    if q > Fraction(1, 2):
        q = 1 - q
    if q == 0:
        return Iv.point(0)
    if q == Fraction(1, 2):
        return Iv.point(1)
    return _sin_taylor(PI.scale(q))


def cospi(q: Rat) -> Iv:
    """Certified enclosure of cos(pi*q) for rational q."""
    return sinpi(Fraction(q) + Fraction(1, 2))


_SINPI_SQ = {
    Fraction(0): Fraction(0),
    Fraction(1, 6): Fraction(1, 4),
    Fraction(1, 4): Fraction(1, 2),
    Fraction(1, 3): Fraction(3, 4),
    Fraction(1, 2): Fraction(1),
}


def sinpi_sq_exact(q: Rat) -> Optional[Fraction]:
    """Exact rational value of sin(pi*q)**2 when one exists, else None."""
    q = Fraction(q) % 1
    if q > Fraction(1, 2):
        q = 1 - q
    return _SINPI_SQ.get(q)
