"""Concrete measure-preserving Z^r-systems with exactly computable measures.

Two model classes are supported.  Finite systems are translation actions on
a finite abelian group A (held as tuples modulo an invariant-factor chain)
through a homomorphism phi: Z^r -> A given by generator images; every
measure is an exact Fraction.  Kronecker systems are torus rotations
x -> x + Theta*lam with FormalReal frequency entries and sets restricted to
disjoint unions of rational half-open boxes, so Lebesgue measures and
character identities stay exact in the declared-symbol model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd, lcm, prod
from typing import Iterable, Optional, Sequence

from .formal import FormalReal
from .lattice import (
    SubLattice,
    as_coords,
    hnf,
    kernel_basis,
    mat_columns,
    snf,
)

Element = tuple[int, ...]


# ---------------------------------------------------------------------------
# finite systems

@dataclass(frozen=True)
class FiniteSystem:
    """Ergodic translation action of Z^rank on a finite abelian group.

    ``moduli`` is the invariant-factor chain (entries > 1, each dividing the
    next); the empty tuple is the one-point system.  ``gens[j]`` is the image
    of the j-th standard basis vector, and surjectivity of the induced
    homomorphism (checked by the constructors) is exactly ergodicity.
    """

    rank: int
    moduli: tuple[int, ...]
    gens: tuple[Element, ...]

    @property
    def size(self) -> int:
        return prod(self.moduli) if self.moduli else 1

    @property
    def exponent(self) -> int:
        return self.moduli[-1] if self.moduli else 1

    def elements(self) -> list[Element]:
        return [tuple(e) for e in product(*(range(d) for d in self.moduli))]

    def reduce(self, x: Sequence[int]) -> Element:
        return tuple(int(v) % d for v, d in zip(x, self.moduli, strict=True))

    def add(self, a: Element, b: Element) -> Element:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.moduli, strict=True))

    def scale(self, m: int, a: Element) -> Element:
        return tuple((m * x) % d for x, d in zip(a, self.moduli, strict=True))

    def phi(self, lam) -> Element:
        c = as_coords(lam)
        if len(c) != self.rank:
            raise ValueError("rank mismatch")
        acc = tuple(0 for _ in self.moduli)
        for coeff, g in zip(c, self.gens):
            if coeff:
                acc = self.add(acc, self.scale(coeff, g))
        return acc

    def order_of(self, g: Element) -> int:
        if not self.moduli:
            return 1
        return lcm(*(d // gcd(x, d) for x, d in zip(g, self.moduli)))

    def subgroup(self, generators: Iterable[Element]) -> frozenset[Element]:
        zero = tuple(0 for _ in self.moduli)
        closed = {zero}
        frontier = [zero]
        gens = [tuple(g) for g in generators]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.add(x, g)
                if y not in closed:
                    closed.add(y)
                    frontier.append(y)
        return frozenset(closed)

    def measure(self, s: Iterable[Element]) -> Fraction:
        return Fraction(len(set(s)), self.size)


def finite_system_from_parts(
    rank: int,
    moduli: Sequence[int],
    gens: Sequence[Sequence[int]],
    require_ergodic: bool = True,
) -> FiniteSystem:
    mods = tuple(int(d) for d in moduli if int(d) != 1)
    if any(d < 1 for d in mods):
        raise ValueError("moduli must be positive")
    if any(b % a for a, b in zip(mods, mods[1:])):
        raise ValueError("moduli must form a divisibility chain")
    if len(gens) != rank:
        raise ValueError("need one generator image per basis vector")
    keep = [i for i, d in enumerate(moduli) if int(d) != 1]
    images = tuple(
        tuple(int(g[i]) % mods[t] for t, i in enumerate(keep)) for g in gens
    )
    sys_ = FiniteSystem(rank=rank, moduli=mods, gens=images)
    if require_ergodic and len(sys_.subgroup(images)) != sys_.size:
        raise ValueError("generator images do not generate the group (non-ergodic)")
    return sys_


def finite_system(L: SubLattice) -> FiniteSystem:
    """The quotient system Z^rank / L with the canonical translation action."""
    q = snf(L.basis_matrix)
    d = q.invariant_factors
    u = q.to_normal
    gens = [[u[i][j] for i in range(L.rank)] for j in range(L.rank)]
    return finite_system_from_parts(L.rank, d, gens, require_ergodic=True)


# ---------------------------------------------------------------------------
# ergodic set specifications

@dataclass(frozen=True)
class ErgodicSetSpec:
    """An averaging subset of Z given by its finite sections S_N.

    ``interval`` is S_N = [0, N); ``ap`` is S_N = offset + step * [0, N).
    Only step = 1 families average correctly on every system; wider steps
    are still valid saturation scans but the expansion inequality is not
    asserted for them.
    """

    kind: str = "interval"
    offset: int = 0
    step: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("interval", "ap"):
            raise ValueError("kind must be 'interval' or 'ap'")
        if self.step < 1:
            raise ValueError("step must be a positive integer")
        if self.kind == "interval" and (self.offset != 0 or self.step != 1):
            raise ValueError("interval spec has offset 0 and step 1")

    def elements(self, count: int) -> list[int]:
        return [self.offset + self.step * t for t in range(count)]

    @property
    def universal(self) -> bool:
        return self.step == 1


def orbit_saturation(
    sys_: FiniteSystem,
    b: Iterable[Element],
    lam,
    sspec: Optional[ErgodicSetSpec] = None,
    terms: Optional[int] = None,
) -> tuple[frozenset[Element], Fraction]:
    """The union of shifts of b along an averaging set, with its exact measure.

    ``sspec=None`` means S = Z: the union over the full cyclic subgroup
    generated by phi(lam).  With a spec and ``terms=None`` the stabilized
    (N -> infinity) union is returned; a finite ``terms`` gives the partial
    union over the first ``terms`` elements of S.
    """
    g = sys_.phi(lam)
    bset = {tuple(x) for x in b}
    if terms is not None and sspec is None:
        raise ValueError("terms requires an ErgodicSetSpec")
    if sspec is None:
        shifts = sys_.subgroup([g])
    elif terms is None:
        step_sub = sys_.subgroup([sys_.scale(sspec.step, g)])
        base = sys_.scale(sspec.offset, g)
        shifts = frozenset(sys_.add(base, h) for h in step_sub)
    else:
        shifts = frozenset(sys_.scale(m, g) for m in sspec.elements(terms))
    sat = {sys_.add(x, s) for x in bset for s in shifts}
    return frozenset(sat), sys_.measure(sat)


def is_ergodic_direction(sys_, lam) -> bool:
    """Does the cyclic subgroup of lam act ergodically?"""
    c = as_coords(lam)
    if all(x == 0 for x in c):
        raise ValueError("direction must be nonzero")
    if isinstance(sys_, KroneckerSystem):
        return _kronecker_direction_ergodic(sys_, c)
    return sys_.order_of(sys_.phi(c)) == sys_.size


def max_directional_expansion(
    sys_: FiniteSystem, b: Iterable[Element], candidates: Sequence
) -> tuple[Fraction, tuple[int, ...]]:
    """Exact maximum of the full-orbit saturation over candidate directions.

    Candidates are scanned in lexicographic order and ties keep the earlier
    (lexicographically least) direction.
    """
    cands = sorted({as_coords(v) for v in candidates})
    if not cands:
        raise ValueError("no candidates")
    if any(all(x == 0 for x in c) for c in cands):
        raise ValueError("candidates must be nonzero")
    bset = frozenset(tuple(x) for x in b)
    best: Optional[tuple[Fraction, tuple[int, ...]]] = None
    for lam in cands:
        _, mu = orbit_saturation(sys_, bset, lam)
        if best is None or mu > best[0]:
            best = (mu, lam)
    return best


@dataclass(frozen=True)
class ErgodicComponent:
    """One ergodic piece of the action of a finite-index sublattice."""

    support: frozenset[Element]
    weight: Fraction

    def measure(self, s: Iterable[Element]) -> Fraction:
        sset = {tuple(x) for x in s}
        return Fraction(len(sset & self.support), len(self.support))


def ergodic_components(sys_: FiniteSystem, L: SubLattice) -> list[ErgodicComponent]:
    """Decompose the uniform measure under the sub-action of L.

    Components are the cosets of the image subgroup phi(L), each carrying
    normalized counting measure and weight |coset| / |A|; they are listed by
    lexicographically least representative.
    """
    if L.rank != sys_.rank:
        raise ValueError("rank mismatch")
    images = [sys_.phi(col) for col in mat_columns(L.basis_matrix)]
    sub = sys_.subgroup(images)
    seen: set[Element] = set()
    comps = []
    for x in sys_.elements():
        if x in seen:
            continue
        coset = frozenset(sys_.add(x, h) for h in sub)
        seen |= coset
        comps.append(
            ErgodicComponent(support=coset, weight=Fraction(len(coset), sys_.size))
        )
    return comps


def birkhoff_annihilator_average(
    sys_: FiniteSystem, b: Iterable[Element], lam, n: int
) -> Fraction:
    """(1/n) * sum_{k<n} mu(B intersect (k*lam).B), exact."""
    if n < 1:
        raise ValueError("horizon must be positive")
    bset = frozenset(tuple(x) for x in b)
    g = sys_.phi(lam)
    total = 0
    for k in range(n):
        shift = sys_.scale(k, g)
        total += sum(1 for x in bset if sys_.add(x, shift) in bset)
    return Fraction(total, n * sys_.size)


# ---------------------------------------------------------------------------
# component presentation (the sub-action of a sublattice on one coset,
# rewritten as an ergodic finite system in its own right)

@dataclass(frozen=True)
class ComponentPresentation:
    """A component of the L-action presented as an ergodic system.

    ``system`` is the coset rewritten as a group translation action of Z^r,
    where Z^r is identified with L through the columns of its basis matrix.
    ``to_component`` relabels carrier points of the ambient system lying in
    the support; ``base`` is the support's lexicographically least point.
    """

    system: FiniteSystem
    base: Element
    to_component: dict
    from_component: dict

    def restrict(self, s: Iterable[Element]) -> frozenset[Element]:
        return frozenset(
            self.to_component[x] for x in s if x in self.to_component
        )


def component_presentation(
    sys_: FiniteSystem, L: SubLattice, comp: ErgodicComponent
) -> ComponentPresentation:
    images = [sys_.phi(col) for col in mat_columns(L.basis_matrix)]
    s = len(sys_.moduli)
    base = min(comp.support)
    if s == 0:
        one_point = finite_system_from_parts(sys_.rank, (), [()] * sys_.rank, False)
        return ComponentPresentation(
            system=one_point, base=base, to_component={(): ()}, from_component={(): ()}
        )
    # subgroup G = <images> inside A, presented through its own Smith chain:
    # lift G to the lattice spanned by the images and the relations diag(moduli),
    # express the relations in a basis of that lattice, and take its Smith form.
    cols = [list(g) for g in images] + [
        [sys_.moduli[i] if i == j else 0 for i in range(s)] for j in range(s)
    ]
    m = [[cols[j][i] for j in range(len(cols))] for i in range(s)]
    h, _ = hnf(m)
    hb = [[h[i][j] for j in range(s)] for i in range(s)]

    def solve_hb(vec: Sequence[int]) -> list[int]:
        y = [0] * s
        for i in range(s):
            rem = vec[i] - sum(hb[i][j] * y[j] for j in range(i))
            if rem % hb[i][i]:
                raise ArithmeticError("point not in the subgroup lattice")
            y[i] = rem // hb[i][i]
        return y

    relations = [
        [solve_hb([sys_.moduli[i] if i == j else 0 for i in range(s)])[t] for j in range(s)]
        for t in range(s)
    ]
    q = snf(relations)
    factors = q.invariant_factors
    u = q.to_normal

    def relabel(a: Element) -> Element:
        y = solve_hb(list(a))
        z = [sum(u[i][j] * y[j] for j in range(s)) % factors[i] for i in range(s)]
        return tuple(z[i] for i in range(s) if factors[i] != 1)

    comp_gens = [relabel(g) for g in images]
    comp_sys = finite_system_from_parts(sys_.rank, factors, _pad(comp_gens, factors), True)
    to_comp = {}
    from_comp = {}
    for x in sorted(comp.support):
        diff = tuple((a - b_) % d for a, b_, d in zip(x, base, sys_.moduli))
        label = relabel(diff)
        to_comp[x] = label
        from_comp[label] = x
    return ComponentPresentation(
        system=comp_sys, base=base, to_component=to_comp, from_component=from_comp
    )


def _pad(gens: list[Element], factors: tuple[int, ...]) -> list[list[int]]:
    # relabel() already dropped the factor-1 coordinates; rebuild full-width
    # rows so finite_system_from_parts can drop them again consistently.
    keep = [i for i, f in enumerate(factors) if f != 1]
    out = []
    for g in gens:
        row = [0] * len(factors)
        for pos, i in enumerate(keep):
            row[i] = g[pos]
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# Kronecker (torus rotation) systems

@dataclass(frozen=True)
class Box:
    """Half-open product of rational intervals inside [0, 1)^dim."""

    bounds: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        norm = tuple((Fraction(a), Fraction(b)) for a, b in self.bounds)
        object.__setattr__(self, "bounds", norm)
        for a, b in norm:
            if not (0 <= a < b <= 1):
                raise ValueError("box bounds must satisfy 0 <= lo < hi <= 1")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def volume(self) -> Fraction:
        return prod((b - a for a, b in self.bounds), start=Fraction(1))

    def overlaps(self, other: "Box") -> bool:
        return all(
            a1 < b2 and a2 < b1
            for (a1, b1), (a2, b2) in zip(self.bounds, other.bounds, strict=True)
        )


@dataclass(frozen=True)
class BoxUnion:
    boxes: tuple[Box, ...]

    def __post_init__(self) -> None:
        if not self.boxes:
            raise ValueError("need at least one box")
        d = self.boxes[0].dim
        if any(b.dim != d for b in self.boxes):
            raise ValueError("mixed dimensions")
        for i in range(len(self.boxes)):
            for j in range(i + 1, len(self.boxes)):
                if self.boxes[i].overlaps(self.boxes[j]):
                    raise ValueError("boxes must be pairwise disjoint")

    @property
    def dim(self) -> int:
        return self.boxes[0].dim

    def volume(self) -> Fraction:
        return sum((b.volume() for b in self.boxes), start=Fraction(0))

    @classmethod
    def of(cls, *bounds_lists) -> "BoxUnion":
        return cls(tuple(Box(tuple(bb)) for bb in bounds_lists))


@dataclass(frozen=True)
class KroneckerSystem:
    """Torus rotation action lam.x = x + Theta*lam mod 1 on [0,1)^dim."""

    rank: int
    dim: int
    theta: tuple[tuple[FormalReal, ...], ...]  # dim rows, rank columns

    def direction_value(self, lam) -> list[FormalReal]:
        c = as_coords(lam)
        if len(c) != self.rank:
            raise ValueError("rank mismatch")
        return [
            sum((row[j] * c[j] for j in range(self.rank)), start=FormalReal.of(0))
            for row in self.theta
        ]

    def pairing(self, freq: Sequence[int]) -> list[FormalReal]:
        k = [int(x) for x in freq]
        if len(k) != self.dim:
            raise ValueError("frequency dimension mismatch")
        return [
            sum((self.theta[i][j] * k[i] for i in range(self.dim)), start=FormalReal.of(0))
            for j in range(self.rank)
        ]


def _symbol_kernel(forms: Sequence[Sequence[FormalReal]]) -> list[tuple[int, ...]]:
    """Integer kernel of the symbol-coefficient matrix of a family of forms.

    ``forms[i]`` lists the FormalReal entries attached to coordinate i of the
    frequency vector k; a frequency k kills every irrational part exactly
    when k lies in this kernel.  Empty kernel basis means only k = 0.
    """
    dim = len(forms)
    symbols = sorted({name for row in forms for f in row for name in f.symbols()})
    if not symbols or not forms[0]:
        # no irrational content at all: every k kills the (empty) symbol part
        return [tuple(1 if i == j else 0 for i in range(dim)) for j in range(dim)]
    ncols = len(forms[0])
    rows = []
    for j in range(ncols):
        for t in symbols:
            rows.append([forms[i][j].coeff(t) for i in range(dim)])
    # scale each row to integers
    int_rows = []
    for row in rows:
        den = lcm(*(f.denominator for f in row)) if row else 1
        int_rows.append([int(f * den) for f in row])
    return kernel_basis(int_rows)


def kronecker_ergodicity_certificate(sys_: KroneckerSystem) -> dict:
    """Exact ergodicity decision with the reasoning recorded.

    The full action is ergodic iff no nonzero frequency k makes every entry
    of k^T Theta an integer.  Killing the irrational parts is an integer
    kernel condition on the symbol-coefficient matrix, and any nonzero
    kernel vector scales (by the lcm of the rational-part denominators) to a
    genuine violating frequency, so triviality of that kernel is equivalent
    to ergodicity.  No search box is involved.
    """
    forms = [[sys_.theta[i][j] for j in range(sys_.rank)] for i in range(sys_.dim)]
    kernel = _symbol_kernel(forms)
    witness = None
    if kernel:
        k0 = kernel[0]
        rationals = [
            sum((sys_.theta[i][j].rational * k0[i] for i in range(sys_.dim)), Fraction(0))
            for j in range(sys_.rank)
        ]
        d = lcm(*(q.denominator for q in rationals)) if rationals else 1
        witness = tuple(d * x for x in k0)
    return {
        "ergodic": not kernel,
        "method": "integer kernel of the symbol-coefficient matrix",
        "kernel_rank": len(kernel),
        "witness_frequency": witness,
    }


def kronecker_system(
    rank: int, dim: int, theta: Sequence[Sequence[FormalReal]], require_ergodic: bool = True
) -> KroneckerSystem:
    rows = tuple(
        tuple(x if isinstance(x, FormalReal) else FormalReal.of(x) for x in row)
        for row in theta
    )
    if len(rows) != dim or any(len(r) != rank for r in rows):
        raise ValueError("theta must be dim x rank")
    sys_ = KroneckerSystem(rank=rank, dim=dim, theta=rows)
    if require_ergodic:
        cert = kronecker_ergodicity_certificate(sys_)
        if not cert["ergodic"]:
            raise ValueError(
                f"frequency matrix is not ergodic; violating frequency {cert['witness_frequency']}"
            )
    return sys_


def _kronecker_direction_ergodic(sys_: KroneckerSystem, lam: Sequence[int]) -> bool:
    w = sys_.direction_value(lam)
    forms = [[w[i]] for i in range(sys_.dim)]
    return not _symbol_kernel(forms)


@dataclass(frozen=True)
class KroneckerSaturation:
    """Orbit-saturation answer for a torus direction.

    Exact only when the direction's frequency vector is fully rational (the
    orbit is then finite); otherwise ``lower`` is the trivial certified
    bound mu(B) and callers should sharpen it with the spectral bound.
    """

    lower: Fraction
    upper: Fraction
    exact: bool
    note: str = ""


def _box_grid_cells(b: BoxUnion, q: int) -> set[tuple[int, ...]]:
    cells: set[tuple[int, ...]] = set()
    for box in b.boxes:
        ranges = [range(int(a * q), int(bb * q)) for a, bb in box.bounds]
        cells |= set(product(*ranges))
    return cells


def box_overlap_volume(
    b: BoxUnion, shift: Sequence[Fraction], grid_limit: int = 10**6
) -> Fraction:
    """Exact Lebesgue volume of b intersected with its translate by shift mod 1."""
    shift = [Fraction(x) % 1 for x in shift]
    q = lcm(
        *(x.denominator for x in shift),
        *(x.denominator for box in b.boxes for a_b in box.bounds for x in a_b),
    )
    if q**b.dim > grid_limit:
        raise ValueError("rational overlap grid too fine; raise grid_limit")
    cells = _box_grid_cells(b, q)
    off = [int(x * q) for x in shift]
    shifted = {tuple((c + o) % q for c, o in zip(cell, off)) for cell in cells}
    return Fraction(len(cells & shifted), q**b.dim)


def kronecker_orbit_saturation(
    sys_: KroneckerSystem, b: BoxUnion, lam, grid_limit: int = 10**6
) -> KroneckerSaturation:
    w = sys_.direction_value(lam)
    if b.dim != sys_.dim:
        raise ValueError("set dimension mismatch")
    if not all(f.is_rational for f in w):
        return KroneckerSaturation(
            lower=b.volume(),
            upper=Fraction(1),
            exact=False,
            note="irrational direction: estimate only; see spectral expansion bound",
        )
    shifts = [f.rational for f in w]
    q = lcm(
        *(f.denominator for f in shifts),
        *(x.denominator for box in b.boxes for a_b in box.bounds for x in a_b),
    )
    if q**b.dim > grid_limit:
        raise ValueError("rational orbit grid too fine; raise grid_limit")
    base_cells = _box_grid_cells(b, q)
    cells: set[tuple[int, ...]] = set()
    period = lcm(*(f.denominator for f in shifts))
    for m in range(period):
        off = [int((m * f) % 1 * q) for f in shifts]
        cells |= {tuple((c + o) % q for c, o in zip(cell, off)) for cell in base_cells}
    vol = Fraction(len(cells), q**b.dim)
    return KroneckerSaturation(lower=vol, upper=vol, exact=True)
