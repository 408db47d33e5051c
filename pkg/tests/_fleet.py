"""Deterministic random fleets of small ergodic systems for the test suites."""

from latspec.lattice import det_exact, sublattice
from latspec.prng import SplitMix64
from latspec.systems import finite_system


def random_fleet(seed, count, rank_choices=(1, 2, 3), order_max=64, entry=4):
    """``count`` pairs (system, nonempty set B), reproducible from the seed."""
    rng = SplitMix64(seed)
    fleet = []
    while len(fleet) < count:
        r = rank_choices[rng.below(len(rank_choices))]
        m = [[rng.randint(-entry, entry) for _ in range(r)] for _ in range(r)]
        d = det_exact(m)
        if d == 0 or abs(d) > order_max:
            continue
        sys_ = finite_system(sublattice(m))
        els = sys_.elements()
        b = frozenset(e for e in els if rng.below(2) == 0)
        if not b:
            b = frozenset({els[rng.below(len(els))]})
        fleet.append((sys_, b))
    return fleet
