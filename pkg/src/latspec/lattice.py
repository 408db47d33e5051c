"""Exact arithmetic for finite-rank integer lattices.

Everything here runs on plain Python integers, so there is no precision
ceiling: Hermite and Smith reductions, fraction-free determinants and
unimodular completions stay exact for arbitrarily large entries.

Matrix convention: a matrix is a sequence of rows, and the *columns* of a
basis matrix generate the lattice.  The canonical column Hermite form used
throughout is lower triangular with positive pivots; in each pivot row the
entries to the left of the pivot are reduced into ``[0, pivot)``.  Two
sublattices are equal exactly when their canonical basis matrices are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

Matrix = list[list[int]]


@dataclass(frozen=True)
class LatVec:
    """A point of Z^r with arbitrary-precision integer coordinates."""

    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if not self.coords:
            raise ValueError("rank must be at least 1")

    @property
    def rank(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i: int) -> int:
        return self.coords[i]

    def __add__(self, other: "LatVec") -> "LatVec":
        return LatVec(tuple(a + b for a, b in zip(self.coords, as_coords(other), strict=True)))

    def __sub__(self, other: "LatVec") -> "LatVec":
        return LatVec(tuple(a - b for a, b in zip(self.coords, as_coords(other), strict=True)))

    def __neg__(self) -> "LatVec":
        return LatVec(tuple(-a for a in self.coords))

    def __mul__(self, n: int) -> "LatVec":
        return LatVec(tuple(n * a for a in self.coords))

    __rmul__ = __mul__


def as_coords(v) -> tuple[int, ...]:
    """Coerce a LatVec or any integer sequence to a coordinate tuple."""
    if isinstance(v, LatVec):
        return v.coords
    return tuple(int(c) for c in v)


def is_primitive(v) -> bool:
    """True iff the gcd of the coordinates is 1 (the zero vector is not primitive)."""
    c = as_coords(v)
    if not c:
        raise ValueError("rank must be at least 1")
    g = 0
    for x in c:
        g = gcd(g, x)
    return g == 1


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended gcd: returns (g, x, y) with g = gcd(a, b) >= 0 and a*x + b*y = g."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        return -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def _to_matrix(M) -> Matrix:
    rows = [[int(x) for x in row] for row in M]
    if not rows or not rows[0]:
        raise ValueError("matrix must be nonempty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix")
    return rows


def mat_identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> Matrix:
    n, k, m = len(A), len(B), len(B[0])
    if len(A[0]) != k:
        raise ValueError("dimension mismatch")
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def mat_vec(A: Sequence[Sequence[int]], v: Sequence[int]) -> list[int]:
    if len(A[0]) != len(v):
        raise ValueError("dimension mismatch")
    return [sum(row[j] * v[j] for j in range(len(v))) for row in A]


def mat_from_columns(cols: Iterable[Sequence[int]]) -> Matrix:
    cols = [as_coords(c) for c in cols]
    r = len(cols[0])
    if any(len(c) != r for c in cols):
        raise ValueError("columns of unequal rank")
    return [[c[i] for c in cols] for i in range(r)]


def mat_columns(M: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    return [tuple(row[j] for row in M) for j in range(len(M[0]))]


def det_exact(M) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination.

    Intermediate entries are minors of the input, so growth stays polynomial
    while every division is exact.
    """
    A = _to_matrix(M)
    n = len(A)
    if len(A[0]) != n:
        raise ValueError("matrix must be square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if pivot is None:
                return 0
            A[k], A[pivot] = A[pivot], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
            A[i][k] = 0
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def _column_echelon(M) -> tuple[Matrix, Matrix, list[tuple[int, int]]]:
    """Column-reduce M over Z by unimodular column operations.

    Returns (H, U, pivots) with H = M @ U, U unimodular, and pivots a list of
    (row, column) positions.  Columns that never receive a pivot end up zero
    and sit at the right; their U-columns form a basis of the integer kernel.
    """
    H = _to_matrix(M)
    rows, cols = len(H), len(H[0])
    U = mat_identity(cols)
    pivots: list[tuple[int, int]] = []
    piv = 0
    for i in range(rows):
        if piv >= cols:
            break
        for j in range(piv + 1, cols):
            if H[i][j] == 0:
                continue
            a, b = H[i][piv], H[i][j]
            if a != 0 and b % a == 0:
                q = b // a
                for t in range(rows):
                    H[t][j] -= q * H[t][piv]
                for t in range(cols):
                    U[t][j] -= q * U[t][piv]
                continue
            g, x, y = _xgcd(a, b)
            p, q = a // g, b // g
            for t in range(rows):
                hp, hj = H[t][piv], H[t][j]
                H[t][piv] = x * hp + y * hj
                H[t][j] = p * hj - q * hp
            for t in range(cols):
                up, uj = U[t][piv], U[t][j]
                U[t][piv] = x * up + y * uj
                U[t][j] = p * uj - q * up
        if H[i][piv] == 0:
            continue
        if H[i][piv] < 0:
            for t in range(rows):
                H[t][piv] = -H[t][piv]
            for t in range(cols):
                U[t][piv] = -U[t][piv]
        for _, j2 in pivots:
            q = H[i][j2] // H[i][piv]
            if q:
                for t in range(rows):
                    H[t][j2] -= q * H[t][piv]
                for t in range(cols):
                    U[t][j2] -= q * U[t][piv]
        pivots.append((i, piv))
        piv += 1
    return H, U, pivots


def hnf(M) -> tuple[Matrix, Matrix]:
    """Canonical column Hermite normal form.

    Returns (H, U) with H = M @ U, U unimodular.  Requires full row rank;
    rank-deficient input raises ``ValueError("not full rank")``.
    """
    H, U, pivots = _column_echelon(M)
    if len(pivots) != len(H):
        raise ValueError("not full rank")
    return H, U


def kernel_basis(M) -> list[tuple[int, ...]]:
    """Basis of the integer kernel {x : M @ x = 0}, as coordinate tuples."""
    _, U, pivots = _column_echelon(M)
    cols = len(U)
    return [tuple(U[t][j] for t in range(cols)) for j in range(len(pivots), cols)]


@dataclass(frozen=True)
class QuotientStructure:
    """Smith data of a nonsingular basis matrix B.

    ``to_normal @ B @ from_normal = diag(invariant_factors)`` with both
    transforms unimodular, the factors positive and each dividing the next.
    """

    invariant_factors: tuple[int, ...]
    to_normal: tuple[tuple[int, ...], ...]
    from_normal: tuple[tuple[int, ...], ...]


def snf(M) -> QuotientStructure:
    """Smith normal form of a nonsingular integer matrix."""
    A = _to_matrix(M)
    n = len(A)
    if len(A[0]) != n:
        raise ValueError("matrix must be square")
    U = mat_identity(n)
    V = mat_identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for t in range(n):
            A[t][i], A[t][j] = A[t][j], A[t][i]
            V[t][i], V[t][j] = V[t][j], V[t][i]

    for t in range(n):
        # pull some nonzero entry of the trailing block into position (t, t)
        pivot = next(
            ((i, j) for i in range(t, n) for j in range(t, n) if A[i][j] != 0),
            None,
        )
        if pivot is None:
            raise ValueError("singular matrix")
        if pivot[0] != t:
            swap_rows(t, pivot[0])
        if pivot[1] != t:
            swap_cols(t, pivot[1])
        while True:
            # termination: divisible entries are cleared by plain subtraction
            # (pivot row/column untouched); a gcd block runs only when the
            # pivot shrinks strictly, so the cleaning loop cannot cycle.
            for i in range(t + 1, n):
                if A[i][t] == 0:
                    continue
                a, b = A[t][t], A[i][t]
                if b % a == 0:
                    q = b // a
                    for j in range(n):
                        A[i][j] -= q * A[t][j]
                    for j in range(n):
                        U[i][j] -= q * U[t][j]
                    continue
                g, x, y = _xgcd(a, b)
                p, q = a // g, b // g
                for j in range(n):
                    at, ai = A[t][j], A[i][j]
                    A[t][j] = x * at + y * ai
                    A[i][j] = p * ai - q * at
                for j in range(n):
                    ut, ui = U[t][j], U[i][j]
                    U[t][j] = x * ut + y * ui
                    U[i][j] = p * ui - q * ut
            for j in range(t + 1, n):
                if A[t][j] == 0:
                    continue
                a, b = A[t][t], A[t][j]
                if b % a == 0:
                    q = b // a
                    for i in range(n):
                        A[i][j] -= q * A[i][t]
                    for i in range(n):
                        V[i][j] -= q * V[i][t]
                    continue
                g, x, y = _xgcd(a, b)
                p, q = a // g, b // g
                for i in range(n):
                    at, aj = A[i][t], A[i][j]
                    A[i][t] = x * at + y * aj
                    A[i][j] = p * aj - q * at
                for i in range(n):
                    vt, vj = V[i][t], V[i][j]
                    V[i][t] = x * vt + y * vj
                    V[i][j] = p * vj - q * vt
            if any(A[i][t] for i in range(t + 1, n)):
                continue
            if any(A[t][j] for j in range(t + 1, n)):
                continue
            # absorb any trailing entry the pivot does not divide yet
            d = A[t][t]
            bad = next(
                ((i, j) for i in range(t + 1, n) for j in range(t + 1, n) if A[i][j] % d),
                None,
            )
            if bad is None:
                break
            i = bad[0]
            for j in range(n):
                A[t][j] += A[i][j]
            for j in range(n):
                U[t][j] += U[i][j]
        if A[t][t] < 0:
            for j in range(n):
                A[t][j] = -A[t][j]
            for j in range(n):
                U[t][j] = -U[t][j]
    factors = tuple(A[t][t] for t in range(n))
    return QuotientStructure(
        invariant_factors=factors,
        to_normal=tuple(tuple(row) for row in U),
        from_normal=tuple(tuple(row) for row in V),
    )


def complete_to_basis(v) -> Matrix:
    """Unimodular matrix with determinant exactly 1 whose first column is v.

    Works by driving v to e_1 with a chain of 2x2 extended-gcd row blocks
    (each of determinant 1) and returning the accumulated inverse.  For rank
    1 only v = (1) is completable, since a 1x1 matrix has determinant v.
    """
    c = list(as_coords(v))
    if not is_primitive(c):
        raise ValueError("not primitive")
    r = len(c)
    if r == 1:
        if c[0] != 1:
            raise ValueError("rank-1 completion with determinant 1 requires v = (1)")
        return [[1]]
    inv = mat_identity(r)
    for i in range(1, r):
        a, b = c[0], c[i]
        if b == 0:
            continue
        g, x, y = _xgcd(a, b)
        p, q = a // g, b // g
        c[0], c[i] = g, 0
        # fold the inverse block [[p, -y], [q, x]] into columns 0 and i
        for t in range(r):
            u0, ui = inv[t][0], inv[t][i]
            inv[t][0] = u0 * p + ui * q
            inv[t][i] = -u0 * y + ui * x
    if c[0] == -1:
        # only reachable when every other coordinate is zero: negate two
        # columns (determinant unchanged) to land on +1
        for t in range(r):
            inv[t][0] = -inv[t][0]
            inv[t][1] = -inv[t][1]
    if det_exact(inv) != 1:  # defensive: the block chain has determinant 1
        raise AssertionError("unimodular completion lost determinant 1")
    return inv


@dataclass(frozen=True)
class SubLattice:
    """Finite-index subgroup of Z^rank, basis in canonical column HNF."""

    rank: int
    basis_matrix: tuple[tuple[int, ...], ...]
    index: int


def sublattice(M) -> SubLattice:
    """Canonicalize a full-rank generating matrix (columns generate) to a SubLattice."""
    rows = _to_matrix(M)
    r = len(rows)
    if len(rows[0]) < r:
        raise ValueError("not full rank")
    H, _ = hnf(rows)
    basis = tuple(tuple(H[i][j] for j in range(r)) for i in range(r))
    index = 1
    for i in range(r):
        index *= basis[i][i]
    return SubLattice(rank=r, basis_matrix=basis, index=index)


def scale_lattice(rank: int, n: int) -> SubLattice:
    """The sublattice n * Z^rank, of index n**rank."""
    if rank < 1:
        raise ValueError("rank must be at least 1")
    if n < 1:
        raise ValueError("scale must be a positive integer")
    basis = tuple(tuple(n if i == j else 0 for j in range(rank)) for i in range(rank))
    return SubLattice(rank=rank, basis_matrix=basis, index=n**rank)


def contains(L: SubLattice, v) -> bool:
    """Membership of v in the column span of L over Z (exact triangular solve)."""
    c = as_coords(v)
    if len(c) != L.rank:
        raise ValueError("rank mismatch")
    B = L.basis_matrix
    y = [0] * L.rank
    for i in range(L.rank):
        rem = c[i] - sum(B[i][j] * y[j] for j in range(i))
        if rem % B[i][i]:
            return False
        y[i] = rem // B[i][i]
    return True


def smallest_scale_inside(L: SubLattice) -> int:
    """Smallest N with N * Z^rank contained in L: the exponent of Z^rank / L."""
    return snf(L.basis_matrix).invariant_factors[-1]
