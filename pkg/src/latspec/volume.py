"""Simplex volume spectra of finite point sets and pattern-witness search.

The r!-scaled volume of a simplex on vertices v_0..v_r is the determinant of
the difference matrix (v_1-v_0, ..., v_r-v_0); the spectrum of a finite set
is every nonzero |det| realized by an (r+1)-subset.  On top of the spectrum
sit two certificate searches: an arithmetic-progression certificate (a
dilation n with n, 2n, ..., Mn all realized, each with a witness simplex)
and a pattern search for configurations

    lam_0,  lam_0 + m_1*n*lam,  lam_0 + m_k*n*lam + n*lam_k   (k = 2..p)

inside the set, with (n, lam, m_1) shared across all probe tuples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Optional, Sequence

from . import kernels
from .haystack import make_haystack
from .lattice import as_coords, det_exact, is_primitive, mat_from_columns
from .prng import SplitMix64

Point = tuple[int, ...]


@dataclass(frozen=True)
class PointSet:
    """Finite subset of Z^rank inside the box [-window, window]^rank."""

    rank: int
    window: int
    points: frozenset[Point]
    generator: Optional[dict] = None

    @property
    def sorted_points(self) -> list[Point]:
        return sorted(self.points)

    def __contains__(self, p) -> bool:
        return tuple(p) in self.points

    def __len__(self) -> int:
        return len(self.points)


def point_set(points: Sequence, rank: int, window: int, generator: Optional[dict] = None) -> PointSet:
    pts = frozenset(as_coords(p) for p in points)
    for p in pts:
        if len(p) != rank:
            raise ValueError("point rank mismatch")
        if any(abs(x) > window for x in p):
            raise ValueError(f"point {p} outside window [-{window}, {window}]^{rank}")
    return PointSet(rank=rank, window=window, points=pts, generator=generator)


def _window_points(rank: int, window: int):
    return product(range(-window, window + 1), repeat=rank)


def _parse_density(value) -> Fraction:
    d = Fraction(value)
    if not 0 <= d <= 1:
        raise ValueError("density must lie in [0, 1]")
    return d


def build_point_set(descriptor: dict, rank: int, window: int) -> PointSet:
    """Materialize a generator descriptor on the given window.

    Kinds: ``full``, ``congruence`` (offset + modulus * Z^rank), ``random``
    (seeded splitmix64, one 64-bit draw per window point in lexicographic
    order), ``explicit``, ``union``, ``intersection``, ``translate``.  The
    same descriptor, rank, window and seed always regenerate the identical
    set.
    """
    kind = descriptor.get("kind")
    if kind == "full":
        pts = set(_window_points(rank, window))
    elif kind == "congruence":
        n = int(descriptor["modulus"])
        if n < 1:
            raise ValueError("modulus must be positive")
        offset = tuple(int(x) for x in descriptor.get("offset", (0,) * rank))
        if len(offset) != rank:
            raise ValueError("offset rank mismatch")
        pts = {
            p
            for p in _window_points(rank, window)
            if all((x - o) % n == 0 for x, o in zip(p, offset))
        }
    elif kind == "random":
        density = _parse_density(descriptor["density"])
        seed = int(descriptor["seed"])
        threshold = (density.numerator << 64) // density.denominator
        rng = SplitMix64(seed)
        pts = {p for p in _window_points(rank, window) if rng.next_u64() < threshold}
    elif kind == "explicit":
        pts = {tuple(int(x) for x in p) for p in descriptor["points"]}
        pts = {p for p in pts if all(abs(x) <= window for x in p)}
    elif kind == "union":
        pts = set()
        for part in descriptor["parts"]:
            pts |= build_point_set(part, rank, window).points
    elif kind == "intersection":
        parts = descriptor["parts"]
        pts = set(build_point_set(parts[0], rank, window).points)
        for part in parts[1:]:
            pts &= build_point_set(part, rank, window).points
    elif kind == "translate":
        offset = tuple(int(x) for x in descriptor["offset"])
        base = build_point_set(descriptor["base"], rank, window)
        pts = {
            tuple(x + o for x, o in zip(p, offset))
            for p in base.points
        }
        pts = {p for p in pts if all(abs(x) <= window for x in p)}
    else:
        raise ValueError(f"unknown point-set kind: {kind!r}")
    return PointSet(rank=rank, window=window, points=frozenset(pts), generator=dict(descriptor))


@dataclass(frozen=True)
class DensityEstimate:
    """Exact window densities |E ∩ [-N,N]^r| / (2N+1)^r and their running maximum."""

    windows: tuple[int, ...]
    densities: tuple[Fraction, ...]
    proxy: Fraction


def upper_density_estimate(descriptor: dict, rank: int, window_sizes: Sequence[int]) -> DensityEstimate:
    sizes = tuple(int(n) for n in window_sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("window sizes must increase")
    densities = []
    for n in sizes:
        e = build_point_set(descriptor, rank, n)
        densities.append(Fraction(len(e.points), (2 * n + 1) ** rank))
    proxy = max(densities) if densities else Fraction(0)
    return DensityEstimate(windows=sizes, densities=tuple(densities), proxy=proxy)


# ---------------------------------------------------------------------------
# simplices and spectra

def simplex_det(vertices: Sequence) -> int:
    """det(v_1 - v_0, ..., v_r - v_0) for r+1 vertices of rank r, exact."""
    vs = [as_coords(v) for v in vertices]
    r = len(vs[0])
    if len(vs) != r + 1:
        raise ValueError(f"expected {r + 1} vertices for rank {r}, got {len(vs)}")
    cols = [tuple(v[i] - vs[0][i] for i in range(r)) for v in vs[1:]]
    return det_exact(mat_from_columns(cols))


@dataclass(frozen=True)
class SimplexRecord:
    vertices: tuple[Point, ...]
    det: int

    @classmethod
    def from_vertices(cls, vertices: Sequence) -> "SimplexRecord":
        vs = tuple(as_coords(v) for v in vertices)
        return cls(vertices=vs, det=simplex_det(vs))

    def verify(self) -> bool:
        return simplex_det(self.vertices) == self.det


def volume_spectrum(e: PointSet, cap: Optional[int] = None) -> set[int]:
    """Every nonzero |det| over (rank+1)-subsets of e, exhaustively.

    Empty when no nondegenerate simplex exists; restricted to values <= cap
    when a cap is given.
    """
    return kernels.distinct_abs_dets(e.sorted_points, e.rank, cap)


@dataclass(frozen=True)
class ApCertificate:
    """Result of the arithmetic-progression certificate search."""

    ok: bool
    n: Optional[int] = None
    witnesses: dict = field(default_factory=dict)  # m -> SimplexRecord
    best_n: Optional[int] = None
    missing: tuple[int, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def ap_certificate(e: PointSet, m_max: int) -> ApCertificate:
    """Smallest n with n, 2n, ..., m_max*n all in the spectrum, plus witnesses.

    Any feasible n is itself a spectrum value (take m = 1) and a multiple of
    the spectrum gcd, so trying the gcd first and then the spectrum values in
    increasing order finds the true minimum or proves absence.  On failure
    the candidate with the fewest missing multiples is reported.
    """
    if m_max < 1:
        raise ValueError("m_max must be positive")
    if len(e.points) < e.rank + 1:
        return ApCertificate(ok=False, reason="fewer than rank+1 points")
    spectrum = volume_spectrum(e)
    if not spectrum:
        return ApCertificate(ok=False, reason="no nondegenerate simplex")
    g = 0
    for v in spectrum:
        g = gcd(g, v)
    candidates = [g] + [v for v in sorted(spectrum) if v != g]
    best_n = None
    best_missing: tuple[int, ...] = tuple(range(1, m_max + 1))
    for n in candidates:
        missing = tuple(m for m in range(1, m_max + 1) if n * m not in spectrum)
        if not missing:
            targets = [n * m for m in range(1, m_max + 1)]
            idx = kernels.find_det_witnesses(e.sorted_points, e.rank, targets)
            pts = e.sorted_points
            witnesses = {}
            for m in range(1, m_max + 1):
                rec = SimplexRecord.from_vertices([pts[i] for i in idx[n * m]])
                if abs(rec.det) != n * m:  # cross-check kernel arithmetic exactly
                    raise AssertionError("witness determinant mismatch")
                witnesses[m] = rec
            return ApCertificate(ok=True, n=n, witnesses=witnesses)
        if len(missing) < len(best_missing) or (
            len(missing) == len(best_missing) and (best_n is None or n < best_n)
        ):
            best_n, best_missing = n, missing
    return ApCertificate(
        ok=False,
        best_n=best_n,
        missing=best_missing,
        reason="no dilation realizes every multiple",
    )


# ---------------------------------------------------------------------------
# pattern search

@dataclass(frozen=True)
class PatternWitness:
    """A verified configuration for one probe tuple.

    The points lam0, lam0 + m1*n*lam and lam0 + m_k*n*lam + n*lam_k (one pair
    per probe vector lam_k) all belong to the searched set.
    """

    n: int
    lam: Point
    m1: int
    lam0: Point
    pairs: tuple[tuple[int, Point], ...]

    def points(self) -> list[Point]:
        r = len(self.lam)
        pts = [self.lam0]
        pts.append(tuple(self.lam0[i] + self.m1 * self.n * self.lam[i] for i in range(r)))
        for mk, lamk in self.pairs:
            pts.append(
                tuple(
                    self.lam0[i] + mk * self.n * self.lam[i] + self.n * lamk[i]
                    for i in range(r)
                )
            )
        return pts


def verify_pattern_witness(e: PointSet, w: PatternWitness) -> bool:
    return is_primitive(w.lam) and all(p in e.points for p in w.points())


@dataclass(frozen=True)
class SearchBounds:
    """Finite search region for pattern_search."""

    n_max: int = 6
    m_max: int = 6
    lambda_count: int = 6
    multipliers: Optional[tuple[int, ...]] = None
    lambda_candidates: Optional[tuple[Point, ...]] = None

    def candidates(self, rank: int) -> list[Point]:
        if self.lambda_candidates is not None:
            return [as_coords(v) for v in self.lambda_candidates]
        mult = self.multipliers
        if mult is None:
            primes = (2, 3, 5, 7, 11, 13, 17)
            mult = primes[:rank]
        return [h.coords for h in make_haystack(None, mult, self.lambda_count)]


@dataclass(frozen=True)
class PatternSearchResult:
    ok: bool
    witnesses: tuple[PatternWitness, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _signed_range(m_max: int):
    for m in range(1, m_max + 1):
        yield m
        yield -m


def pattern_search(
    e: PointSet,
    p: int,
    probes: Sequence[Sequence],
    bounds: SearchBounds = SearchBounds(),
) -> PatternSearchResult:
    """Find one PatternWitness per probe with (n, lam, m1) shared by all.

    Probes are (p-1)-tuples of rank-r vectors.  Scan order is deterministic:
    n ascending, lam in candidate order, m1 = 1, -1, 2, -2, ...; per probe
    the base point lam0 runs over the set in sorted order and each m_k over
    the same signed order.  Negative multipliers are accepted and recorded
    as such in the witness.
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    r = e.rank
    checked = []
    for probe in probes:
        vs = tuple(as_coords(v) for v in probe)
        if len(vs) != p - 1 or any(len(v) != r for v in vs):
            return PatternSearchResult(ok=False, reason=f"invalid probe: {probe!r}")
        checked.append(vs)
    if not e.points:
        return PatternSearchResult(ok=False, reason="empty point set")
    members = e.points
    base_order = e.sorted_points
    lams = bounds.candidates(r)
    for lam in lams:
        if not is_primitive(lam):
            return PatternSearchResult(ok=False, reason=f"candidate {lam} not primitive")
    for n in range(1, bounds.n_max + 1):
        for lam in lams:
            for m1 in _signed_range(bounds.m_max):
                shift1 = tuple(m1 * n * x for x in lam)
                witnesses = []
                for probe in checked:
                    w = None
                    for lam0 in base_order:
                        if tuple(a + b for a, b in zip(lam0, shift1)) not in members:
                            continue
                        pairs = []
                        for lamk in probe:
                            hit = None
                            for mk in _signed_range(bounds.m_max):
                                q = tuple(
                                    lam0[i] + mk * n * lam[i] + n * lamk[i]
                                    for i in range(r)
                                )
                                if q in members:
                                    hit = mk
                                    break
                            if hit is None:
                                pairs = None
                                break
                            pairs.append((hit, lamk))
                        if pairs is not None:
                            w = PatternWitness(n=n, lam=lam, m1=m1, lam0=lam0, pairs=tuple(pairs))
                            break
                    if w is None:
                        break
                    witnesses.append(w)
                if len(witnesses) == len(checked):
                    for w in witnesses:
                        if not verify_pattern_witness(e, w):
                            raise AssertionError("pattern witness failed re-verification")
                    return PatternSearchResult(ok=True, witnesses=tuple(witnesses))
    return PatternSearchResult(ok=False, reason="exhausted bounds")


def scale_point_set(e: PointSet, n: int) -> PointSet:
    """Dilate every point by n (window scales along)."""
    if n < 1:
        raise ValueError("scale must be positive")
    return PointSet(
        rank=e.rank,
        window=e.window * n,
        points=frozenset(tuple(n * x for x in p) for p in e.points),
        generator=None,
    )
