"""Exact arithmetic with roots of unity.

A sum of N-th roots of unity is held as an integer vector over the power
basis 1, z, ..., z^(N-1) and decided (zero test, rationality test) by
reduction modulo the N-th cyclotomic polynomial.  This is what lets the
spectral identities be checked as identities rather than numerically.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .intervals import Iv, cospi, round_out


def _polydiv_exact(num: list[int], den: Sequence[int]) -> list[int]:
    """Quotient of num by monic den over Z; raises if the division is inexact."""
    num = list(num)
    dn = len(den) - 1
    if den[-1] != 1:
        raise ValueError("divisor must be monic")
    out = [0] * (len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        c = num[i]
        out[i - dn] = c
        if c:
            for j in range(dn + 1):
                num[i - dn + j] -= c * den[j]
    if any(num):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the n-th cyclotomic polynomial."""
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return (-1, 1)
    poly = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            poly = _polydiv_exact(poly, cyclotomic_polynomial(d))
    return tuple(poly)


@lru_cache(maxsize=None)
def reduction_rows(n: int) -> tuple[tuple[int, ...], ...]:
    """Row k: coordinates of z^k over the power basis 1..z^(deg-1), k < n."""
    phi = cyclotomic_polynomial(n)
    deg = len(phi) - 1
    rows: list[tuple[int, ...]] = []
    for k in range(min(n, deg)):
        rows.append(tuple(1 if i == k else 0 for i in range(deg)))
    cur = list(rows[-1]) if rows else []
    for _ in range(deg, n):
        carry = cur[deg - 1]
        nxt = [0] + cur[: deg - 1]
        if carry:
            for i in range(deg):
                nxt[i] -= carry * phi[i]
        rows.append(tuple(nxt))
        cur = nxt
    return tuple(rows)


def reduce_root_vector(n: int, vec: Sequence[int]) -> tuple[int, ...]:
    """Canonical coordinates of sum_k vec[k] * z^k modulo the n-th cyclotomic polynomial."""
    rows = reduction_rows(n)
    deg = len(rows[0])
    out = [0] * deg
    for k, c in enumerate(vec):
        if c:
            row = rows[k]
            for i in range(deg):
                out[i] += c * row[i]
    return tuple(out)


def rational_value_of_reduced(reduced: Sequence[int]):
    """The integer this reduced vector equals, or None if it is irrational."""
    if any(reduced[1:]):
        return None
    return reduced[0]


def root_vector_is_value(n: int, vec: Sequence[int], value: int) -> bool:
    """Exact test: does sum_k vec[k] * z^k equal the integer value?"""
    work = list(vec) + [0] * max(0, 1 - len(vec))
    work[0] -= value
    return not any(reduce_root_vector(n, work))


def enclose_real_root_vector(n: int, vec: Sequence[int]) -> Iv:
    """Certified interval for the real part Re(sum_k vec[k] * z^k).

    Used only for display of irrational weights; decisions go through the
    exact reductions above.
    """
    total = Iv.point(0)
    from fractions import Fraction

    for k, c in enumerate(vec):
        if c:
            total = total + cospi(Fraction(2 * k, n)).scale(c)
    return round_out(total)
