"""Formal real numbers: rational part plus declared irrational symbols.

A FormalReal is q + sum_t c_t * alpha_t with exact rational q and c_t; the
symbols alpha_t are declared rationally independent together with 1.  That
modeling assumption makes "is this an integer?" and "is this rational?"
decidable, which is exactly what torus-character triviality tests need.
Products of two symbolic values are outside the model and raise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rat = Union[int, Fraction]


@dataclass(frozen=True)
class FormalReal:
    rational: Fraction
    terms: tuple[tuple[str, Fraction], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rational", Fraction(self.rational))
        merged: dict[str, Fraction] = {}
        for name, coeff in self.terms:
            coeff = Fraction(coeff)
            if coeff:
                merged[name] = merged.get(name, Fraction(0)) + coeff
        object.__setattr__(
            self,
            "terms",
            tuple(sorted((k, v) for k, v in merged.items() if v)),
        )

    @classmethod
    def of(cls, q: Rat) -> "FormalReal":
        return cls(Fraction(q), ())

    @classmethod
    def sym(cls, name: str, coeff: Rat = 1, rational: Rat = 0) -> "FormalReal":
        return cls(Fraction(rational), ((name, Fraction(coeff)),))

    @property
    def is_rational(self) -> bool:
        return not self.terms

    @property
    def is_integer(self) -> bool:
        return not self.terms and self.rational.denominator == 1

    def coeff(self, name: str) -> Fraction:
        for k, v in self.terms:
            if k == name:
                return v
        return Fraction(0)

    def symbols(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.terms)

    def __add__(self, other: Union["FormalReal", Rat]) -> "FormalReal":
        other = _coerce(other)
        return FormalReal(self.rational + other.rational, self.terms + other.terms)

    __radd__ = __add__

    def __sub__(self, other: Union["FormalReal", Rat]) -> "FormalReal":
        return self + (-_coerce(other))

    def __rsub__(self, other: Rat) -> "FormalReal":
        return _coerce(other) - self

    def __neg__(self) -> "FormalReal":
        return FormalReal(-self.rational, tuple((k, -v) for k, v in self.terms))

    def __mul__(self, other: Rat) -> "FormalReal":
        if isinstance(other, FormalReal):
            if other.is_rational:
                other = other.rational
            elif self.is_rational:
                return other * self.rational
            else:
                raise TypeError("product of two irrational formal reals is undefined")
        q = Fraction(other)
        return FormalReal(self.rational * q, tuple((k, v * q) for k, v in self.terms))

    __rmul__ = __mul__

    def __str__(self) -> str:
        parts = [str(self.rational)] if self.rational or not self.terms else []
        for k, v in self.terms:
            parts.append(f"{v}*{k}" if v != 1 else k)
        return " + ".join(parts)


def _coerce(x: Union[FormalReal, Rat]) -> FormalReal:
    if isinstance(x, FormalReal):
        return x
    return FormalReal.of(x)
