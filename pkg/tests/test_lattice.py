"""Lattice arithmetic against independent oracles.

Oracles used here are deliberately naive: cofactor-expansion determinants,
Cramer-rule lattice membership, and brute-force quotient-group order
statistics.  The library must agree with them exactly.
"""

from itertools import product
from math import gcd, lcm

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latspec.lattice import (
    LatVec,
    complete_to_basis,
    contains,
    det_exact,
    hnf,
    is_primitive,
    kernel_basis,
    mat_columns,
    mat_mul,
    scale_lattice,
    smallest_scale_inside,
    snf,
    sublattice,
)

# ---------------------------------------------------------------------------
# oracles


def oracle_det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        total += (-1) ** j * m[0][j] * oracle_det(minor)
    return total


def oracle_adjugate(m):
    n = len(m)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [m[r][c] for c in range(n) if c != j] for r in range(n) if r != i
            ]
            cof = (-1) ** (i + j) * (oracle_det(minor) if minor else 1)
            adj[j][i] = cof
    return adj


def oracle_member(m, v):
    """v in m @ Z^r by Cramer: adj(m) @ v must vanish mod det(m)."""
    d = oracle_det(m)
    assert d != 0
    adj = oracle_adjugate(m)
    return all(sum(adj[i][j] * v[j] for j in range(len(v))) % d == 0 for i in range(len(v)))


def oracle_quotient_order_stats(m):
    """Order statistics of Z^r / (m @ Z^r), by brute enumeration."""
    d = abs(oracle_det(m))
    r = len(m)
    reps = []
    for v in product(range(d), repeat=r):
        if not any(
            oracle_member(m, tuple(a - b for a, b in zip(v, rep))) for rep in reps
        ):
            reps.append(v)
    assert len(reps) == d
    stats = {}
    for rep in reps:
        t = 1
        while not oracle_member(m, tuple(t * x for x in rep)):
            t += 1
        stats[t] = stats.get(t, 0) + 1
    return stats


def stats_from_factors(factors):
    stats = {}
    for combo in product(*(range(f) for f in factors)):
        o = 1
        for x, f in zip(combo, factors):
            o = lcm(o, f // gcd(x, f))
        stats[o] = stats.get(o, 0) + 1
    return stats


# ---------------------------------------------------------------------------
# primitivity

def test_is_primitive_examples():
    assert is_primitive((2, 3))
    assert not is_primitive((2, 4))
    assert not is_primitive((0, 0, 0))


def test_latvec_basics():
    v = LatVec((2, -3))
    assert v.rank == 2
    assert (v + LatVec((1, 1))).coords == (3, -2)
    assert (2 * v).coords == (4, -6)
    with pytest.raises(ValueError):
        LatVec(())


# ---------------------------------------------------------------------------
# determinants

def test_det_examples():
    assert det_exact([[2, 3], [4, 9]]) == 6 == oracle_det([[2, 3], [4, 9]])
    ident5 = [[int(i == j) for j in range(5)] for i in range(5)]
    assert det_exact(ident5) == 1
    assert det_exact([[1, 1], [2, 2]]) == 0
    with pytest.raises(ValueError):
        det_exact([[1, 2, 3], [4, 5, 6]])


@given(
    st.integers(2, 4).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(-9, 9), min_size=n, max_size=n),
            min_size=n,
            max_size=n,
        )
    )
)
@settings(max_examples=150, deadline=None)
def test_det_matches_cofactor_oracle(m):
    assert det_exact(m) == oracle_det(m)


def test_det_big_integers_no_overflow():
    big = 10**30
    assert det_exact([[big, 1], [1, big]]) == big * big - 1


# ---------------------------------------------------------------------------
# Hermite form

def _canonical_shape(h):
    r = len(h)
    for i in range(r):
        if h[i][i] <= 0:
            return False
        for j in range(i):
            if not 0 <= h[i][j] < h[i][i]:
                return False
        if any(h[i][j] != 0 for j in range(i + 1, len(h[0]))):
            return False
    return True


def test_hnf_identity():
    h, u = hnf([[1, 0], [0, 1]])
    assert h == [[1, 0], [0, 1]]
    assert u == [[1, 0], [0, 1]]


def test_hnf_span_preserved_point_oracle():
    m = [[2, 1], [0, 1]]
    h, u = hnf(m)
    assert abs(det_exact(u)) == 1
    assert abs(det_exact(h)) == 2
    for v in product(range(-4, 5), repeat=2):
        assert oracle_member(m, v) == oracle_member(h, v)


def test_hnf_already_canonical():
    h, _ = hnf([[4, 0], [0, 1]])
    assert h == [[4, 0], [0, 1]]


def test_hnf_rank_deficient_rejected():
    with pytest.raises(ValueError, match="not full rank"):
        hnf([[1, 2], [2, 4]])


@given(
    st.integers(2, 3).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(-5, 5), min_size=n, max_size=n),
            min_size=n,
            max_size=n,
        )
    )
)
@settings(max_examples=100, deadline=None)
def test_hnf_properties(m):
    if oracle_det(m) == 0:
        return
    h, u = hnf(m)
    assert abs(det_exact(u)) == 1
    assert mat_mul(m, u) == h
    assert _canonical_shape(h)
    h2, u2 = hnf(h)
    assert h2 == h
    # span preserved on a small window
    b = 3
    for v in product(range(-b, b + 1), repeat=len(m)):
        assert oracle_member(m, list(v)) == oracle_member(h, list(v))


def test_kernel_basis():
    ker = kernel_basis([[1, 2, 3]])
    assert len(ker) == 2
    for k in ker:
        assert k[0] + 2 * k[1] + 3 * k[2] == 0
    assert kernel_basis([[1, 0], [0, 1]]) == []


# ---------------------------------------------------------------------------
# Smith form

def test_snf_examples():
    assert snf([[2, 0], [0, 2]]).invariant_factors == (2, 2)
    q = snf([[4, 0], [0, 1]])
    assert q.invariant_factors == (1, 4)
    assert stats_from_factors(q.invariant_factors) == oracle_quotient_order_stats(
        [[4, 0], [0, 1]]
    )
    q2 = snf([[2, 1], [0, 3]])
    assert q2.invariant_factors == (1, 6)
    assert stats_from_factors(q2.invariant_factors) == oracle_quotient_order_stats(
        [[2, 1], [0, 3]]
    )


def test_snf_rejects_singular():
    with pytest.raises(ValueError):
        snf([[1, 2], [2, 4]])


@given(
    st.integers(1, 4).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(-10, 10), min_size=n, max_size=n),
            min_size=n,
            max_size=n,
        )
    )
)
@settings(max_examples=120, deadline=None)
def test_snf_properties(m):
    d = oracle_det(m)
    if d == 0:
        return
    q = snf(m)
    factors = q.invariant_factors
    prodf = 1
    for f in factors:
        prodf *= f
    assert prodf == abs(d)
    assert all(b % a == 0 for a, b in zip(factors, factors[1:]))
    diag = mat_mul(mat_mul([list(r) for r in q.to_normal], m), [list(r) for r in q.from_normal])
    n = len(m)
    assert diag == [[factors[i] if i == j else 0 for j in range(n)] for i in range(n)]
    assert abs(det_exact([list(r) for r in q.to_normal])) == 1
    assert abs(det_exact([list(r) for r in q.from_normal])) == 1


def test_snf_order_stats_random_small():
    mats = [[[3, 1], [1, 3]], [[2, 1], [1, -2]], [[6, 2], [0, 2]]]
    for m in mats:
        assert stats_from_factors(snf(m).invariant_factors) == oracle_quotient_order_stats(m)


# ---------------------------------------------------------------------------
# unimodular completion

def test_complete_to_basis_examples():
    assert complete_to_basis((1, 0)) == [[1, 0], [0, 1]]
    m = complete_to_basis((2, 3))
    assert oracle_det(m) == 1
    assert [row[0] for row in m] == [2, 3]
    m3 = complete_to_basis((6, 10, 15))
    assert oracle_det(m3) == 1
    assert [row[0] for row in m3] == [6, 10, 15]


def test_complete_to_basis_rejects_non_primitive():
    with pytest.raises(ValueError, match="not primitive"):
        complete_to_basis((2, 4))


@given(st.lists(st.integers(-30, 30), min_size=2, max_size=5))
@settings(max_examples=200, deadline=None)
def test_complete_to_basis_property(v):
    if not is_primitive(v):
        return
    m = complete_to_basis(v)
    assert det_exact(m) == 1
    assert [row[0] for row in m] == list(v)


# ---------------------------------------------------------------------------
# sublattices

def test_scale_lattice():
    assert scale_lattice(2, 3).index == 9
    assert scale_lattice(1, 1).index == 1
    assert scale_lattice(3, 2).index == 8
    with pytest.raises(ValueError):
        scale_lattice(2, 0)


def test_contains_examples():
    two = scale_lattice(2, 2)
    assert contains(two, (2, 4))
    assert not contains(two, (1, 2))
    L = sublattice([[2, 1], [0, 3]])
    assert contains(L, (3, 3))  # (3,3) = 1*(2,0) + 1*(1,3)


@given(st.integers(1, 5), st.lists(st.integers(-12, 12), min_size=2, max_size=2))
@settings(max_examples=100, deadline=None)
def test_contains_scaled_is_divisibility(n, v):
    assert contains(scale_lattice(2, n), v) == all(x % n == 0 for x in v)


def test_sublattice_canonical_equality():
    a = sublattice([[2, 0], [0, 2]])
    b = sublattice([[2, 2], [0, 2]])  # same span, different generators
    assert a == b
    assert a.index == 4


def test_smallest_scale_inside_examples():
    assert smallest_scale_inside(scale_lattice(2, 2)) == 2
    assert smallest_scale_inside(sublattice([[4, 0], [0, 1]])) == 4
    assert smallest_scale_inside(sublattice([[2, 0], [0, 6]])) == 6


@given(
    st.lists(st.lists(st.integers(-6, 6), min_size=2, max_size=2), min_size=2, max_size=2)
)
@settings(max_examples=80, deadline=None)
def test_smallest_scale_inside_minimality(m):
    if oracle_det(m) == 0:
        return
    L = sublattice(m)
    n = smallest_scale_inside(L)
    r = L.rank
    # N * e_i all lie inside L
    for i in range(r):
        assert contains(L, tuple(n if j == i else 0 for j in range(r)))
    # and no proper divisor N/p works
    for p in {f for f in range(2, n + 1) if n % f == 0 and _is_prime(f)}:
        smaller = n // p
        assert not all(
            contains(L, tuple(smaller if j == i else 0 for j in range(r)))
            for i in range(r)
        )


def _is_prime(n):
    return n > 1 and all(n % d for d in range(2, int(n**0.5) + 1))


def test_columns_generate_convention():
    L = sublattice([[2, 1], [0, 3]])
    for col in mat_columns(L.basis_matrix):
        assert contains(L, col)
