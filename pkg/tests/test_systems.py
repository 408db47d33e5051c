"""Finite and Kronecker model systems: exact measures and decompositions."""

from fractions import Fraction
from itertools import product

import pytest

from _fleet import random_fleet
from latspec.formal import FormalReal
from latspec.lattice import scale_lattice, sublattice
from latspec.prng import SplitMix64
from latspec.systems import (
    Box,
    BoxUnion,
    ErgodicSetSpec,
    birkhoff_annihilator_average,
    component_presentation,
    ergodic_components,
    finite_system,
    finite_system_from_parts,
    is_ergodic_direction,
    kronecker_ergodicity_certificate,
    kronecker_orbit_saturation,
    kronecker_system,
    max_directional_expansion,
    orbit_saturation,
)


def z2z2():
    return finite_system(scale_lattice(2, 2))


def z4():
    return finite_system(sublattice([[4, 0], [0, 1]]))


# ---------------------------------------------------------------------------
# construction

def test_finite_system_examples():
    s = z2z2()
    assert s.moduli == (2, 2) and s.size == 4
    s4 = z4()
    assert s4.moduli == (4,) and s4.size == 4
    trivial = finite_system(sublattice([[1, 0], [0, 1]]))
    assert trivial.size == 1 and trivial.moduli == ()


def test_finite_system_quotient_is_consistent():
    # phi must send the sublattice itself to zero and be surjective
    mats = [[[2, 0], [0, 2]], [[4, 0], [0, 1]], [[2, 1], [0, 3]], [[3, 1], [1, 3]]]
    for m in mats:
        L = sublattice(m)
        s = finite_system(L)
        assert s.size == L.index
        zero = tuple(0 for _ in s.moduli)
        for j in range(L.rank):
            col = tuple(L.basis_matrix[i][j] for i in range(L.rank))
            assert s.phi(col) == zero
        assert len(s.subgroup(s.gens)) == s.size


def test_non_ergodic_parts_rejected():
    with pytest.raises(ValueError, match="non-ergodic"):
        finite_system_from_parts(2, (2, 2), [(1, 0), (1, 0)])


# ---------------------------------------------------------------------------
# saturation and directions

def test_orbit_saturation_examples():
    s = z2z2()
    b = frozenset({(0, 0)})
    sat, mu = orbit_saturation(s, b, (1, 0))
    assert sat == frozenset({(0, 0), (1, 0)}) and mu == Fraction(1, 2)
    s4 = z4()
    _, mu4 = orbit_saturation(s4, {s4.phi((0, 0))}, (1, 0))
    assert mu4 == 1
    _, full = orbit_saturation(s, set(s.elements()), (1, 0))
    assert full == 1


def test_orbit_saturation_idempotent():
    s = z2z2()
    sat, _ = orbit_saturation(s, {(0, 0)}, (1, 0))
    sat2, _ = orbit_saturation(s, sat, (1, 0))
    assert sat2 == sat


def test_partial_saturation_monotone_and_stabilizes():
    s4 = z4()
    b = frozenset({(0,)})
    spec = ErgodicSetSpec()
    prev = Fraction(0)
    for n_terms in range(1, 7):
        _, mu = orbit_saturation(s4, b, (1, 0), spec, terms=n_terms)
        assert mu >= prev
        prev = mu
    _, full = orbit_saturation(s4, b, (1, 0))
    _, limit = orbit_saturation(s4, b, (1, 0), spec)
    assert prev == full == limit == 1


def test_ap_spec_saturation():
    s4 = z4()
    b = frozenset({(0,)})
    spec = ErgodicSetSpec(kind="ap", offset=1, step=2)
    sat, mu = orbit_saturation(s4, b, (1, 0), spec)
    # shifts 1 + 2Z of the generator reach {1, 3}
    assert sat == frozenset({(1,), (3,)}) and mu == Fraction(1, 2)


def test_is_ergodic_direction():
    s = z2z2()
    for lam in [(1, 0), (0, 1), (1, 1), (3, 5)]:
        assert not is_ergodic_direction(s, lam)
    assert is_ergodic_direction(z4(), (1, 0))
    with pytest.raises(ValueError):
        is_ergodic_direction(s, (0, 0))


def test_ergodic_direction_saturates_every_set():
    for sys_, b in random_fleet(616, 10):
        for lam in [(1,) + (0,) * (sys_.rank - 1), (1,) * sys_.rank]:
            if not is_ergodic_direction(sys_, lam):
                continue
            _, mu = orbit_saturation(sys_, b, lam)
            assert mu == 1


def test_max_directional_expansion_examples():
    s = z2z2()
    cands = [v for v in product(range(-3, 4), repeat=2) if v != (0, 0)]
    mu, lam = max_directional_expansion(s, {(0, 0)}, cands)
    assert mu == Fraction(1, 2)
    mu4, _ = max_directional_expansion(z4(), {(0,)}, cands)
    assert mu4 == 1
    full, _ = max_directional_expansion(s, set(s.elements()), cands)
    assert full == 1


# ---------------------------------------------------------------------------
# birkhoff averages

def test_birkhoff_examples():
    s4 = z4()
    assert birkhoff_annihilator_average(s4, {(0,)}, (1, 0), 4) == Fraction(1, 16)
    s = z2z2()
    assert birkhoff_annihilator_average(s, {(0, 0)}, (1, 0), 2) == Fraction(1, 8)
    # lam = 0: every term is mu(B)
    assert birkhoff_annihilator_average(s, {(0, 0)}, (0, 0), 5) == Fraction(1, 4)


# ---------------------------------------------------------------------------
# ergodic components

def test_components_examples():
    s = z2z2()
    comps = ergodic_components(s, scale_lattice(2, 2))
    assert len(comps) == 4 and all(c.weight == Fraction(1, 4) for c in comps)
    whole = ergodic_components(s, sublattice([[1, 0], [0, 1]]))
    assert len(whole) == 1 and whole[0].weight == 1
    s4 = z4()
    comps4 = ergodic_components(s4, sublattice([[2, 0], [0, 1]]))
    assert [sorted(c.support) for c in comps4] == [[(0,), (2,)], [(1,), (3,)]]
    assert all(c.weight == Fraction(1, 2) for c in comps4)


def test_components_reconstruct_measure():
    for sys_, b in random_fleet(2024, 12):
        for n in (1, 2, 3):
            comps = ergodic_components(sys_, scale_lattice(sys_.rank, n))
            assert sum(c.weight for c in comps) == 1
            covered = set()
            for c in comps:
                assert not (covered & c.support)
                covered |= c.support
            assert len(covered) == sys_.size
            mixture = sum(c.weight * c.measure(b) for c in comps)
            assert mixture == sys_.measure(b)


def test_component_presentation_equivariance():
    rng = SplitMix64(5)
    for sys_, _ in random_fleet(77, 8):
        n = 2
        L = scale_lattice(sys_.rank, n)
        comps = ergodic_components(sys_, L)
        pres = component_presentation(sys_, L, comps[0])
        comp_sys = pres.system
        assert comp_sys.size == len(comps[0].support)
        # relabeling is a bijection intertwining the scaled action
        assert sorted(pres.to_component.values()) == sorted(comp_sys.elements())
        for _ in range(10):
            x = sorted(comps[0].support)[rng.below(len(comps[0].support))]
            lam = tuple(rng.randint(-3, 3) for _ in range(sys_.rank))
            moved = sys_.add(x, sys_.phi(tuple(n * v for v in lam)))
            assert pres.to_component[moved] == comp_sys.add(
                pres.to_component[x], comp_sys.phi(lam)
            )


# ---------------------------------------------------------------------------
# Kronecker systems

def test_kronecker_ergodicity_certificate():
    a, b = FormalReal.sym("alpha"), FormalReal.sym("beta")
    cert = kronecker_ergodicity_certificate(kronecker_system(2, 1, [[a, b]]))
    assert cert["ergodic"] and cert["kernel_rank"] == 0
    # fully rational frequencies are never ergodic
    with pytest.raises(ValueError, match="not ergodic"):
        kronecker_system(1, 1, [[Fraction(1, 2)]])
    bad = kronecker_system(1, 1, [[Fraction(1, 2)]], require_ergodic=False)
    cert_bad = kronecker_ergodicity_certificate(bad)
    assert not cert_bad["ergodic"]
    k = cert_bad["witness_frequency"]
    assert k is not None and (Fraction(1, 2) * k[0]).denominator == 1


def test_kronecker_directions():
    a = FormalReal.sym("alpha")
    ks = kronecker_system(2, 1, [[a, FormalReal.of(0)]])
    assert is_ergodic_direction(ks, (1, 0))
    assert not is_ergodic_direction(ks, (0, 1))
    ks2 = kronecker_system(2, 1, [[a, a * 2 + Fraction(1, 3)]])
    # lam = (2, -1): Theta lam = 2a - 2a - 1/3 = -1/3 rational => not ergodic
    assert not is_ergodic_direction(ks2, (2, -1))
    assert is_ergodic_direction(ks2, (1, 0))


def test_box_unions():
    b = BoxUnion.of([(Fraction(0), Fraction(1, 2))])
    assert b.volume() == Fraction(1, 2)
    two = BoxUnion.of(
        [(Fraction(0), Fraction(1, 4))],
        [(Fraction(1, 2), Fraction(3, 4))],
    )
    assert two.volume() == Fraction(1, 2)
    with pytest.raises(ValueError, match="disjoint"):
        BoxUnion.of([(Fraction(0), Fraction(1, 2))], [(Fraction(1, 4), Fraction(3, 4))])
    with pytest.raises(ValueError):
        Box(((Fraction(1, 2), Fraction(1, 2)),))


def test_kronecker_rational_direction_saturation_exact():
    a = FormalReal.sym("alpha")
    ks = kronecker_system(2, 1, [[a, Fraction(1, 3)]])
    b = BoxUnion.of([(Fraction(0), Fraction(1, 6))])
    sat = kronecker_orbit_saturation(ks, b, (0, 1))
    assert sat.exact and sat.lower == Fraction(1, 2)
    b2 = BoxUnion.of([(Fraction(0), Fraction(1, 2))])
    sat2 = kronecker_orbit_saturation(ks, b2, (0, 1))
    assert sat2.exact and sat2.lower == 1


def test_kronecker_irrational_direction_is_estimate():
    a = FormalReal.sym("alpha")
    ks = kronecker_system(2, 1, [[a, Fraction(1, 3)]])
    b = BoxUnion.of([(Fraction(0), Fraction(1, 2))])
    sat = kronecker_orbit_saturation(ks, b, (1, 0))
    assert not sat.exact
    assert sat.lower == Fraction(1, 2) and sat.upper == 1


def test_ergodic_set_spec_validation():
    with pytest.raises(ValueError):
        ErgodicSetSpec(kind="interval", offset=1)
    with pytest.raises(ValueError):
        ErgodicSetSpec(kind="ap", step=0)
    ap = ErgodicSetSpec(kind="ap", offset=3, step=2)
    assert ap.elements(3) == [3, 5, 7]
    assert not ap.universal
    assert ErgodicSetSpec().universal
