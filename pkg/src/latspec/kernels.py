"""Enumeration kernels for simplex-determinant spectra.

The (r+1)-subset determinant scans are the only hot numeric loops in the
package, so they carry numba-jitted int64 kernels with a vectorized NumPy
fallback and a pure-Python exact path.  Selection:

    LATSPEC_KERNELS = auto | numba | numpy | python

``auto`` (the default) means numba when importable, else numpy.  All three
backends return identical results; the int64 backends are only entered when
a determinant bound proves the arithmetic cannot overflow, otherwise the
call silently degrades to the exact Python path.  Ranks other than 2 and 3
always use the Python path.
"""

from __future__ import annotations

import os
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .lattice import det_exact

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag instead
    HAS_NUMBA = False

_ENV = "LATSPEC_KERNELS"
_INT64_SAFE = 1 << 62
#: largest value-indexed flag table the int64 backends will allocate
TABLE_LIMIT = 1 << 27


def backend_name() -> str:
    """Resolve the active backend from the environment."""
    choice = os.environ.get(_ENV, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("LATSPEC_KERNELS=numba but numba is not importable")
        return "numba"
    if choice in ("numpy", "python"):
        return choice
    raise ValueError(f"unknown {_ENV} value: {choice!r}")


def det_bound(max_abs_coord: int, rank: int) -> int:
    """Upper bound r! * (2*c)^r on any |det| of difference vectors."""
    fact = 1
    for i in range(2, rank + 1):
        fact *= i
    return fact * (2 * max_abs_coord) ** rank


def _int64_ok(points: Sequence[tuple[int, ...]], rank: int, limit: int) -> bool:
    if rank not in (2, 3) or not points:
        return False
    c = max(abs(x) for p in points for x in p)
    return det_bound(c, rank) < _INT64_SAFE and limit <= TABLE_LIMIT


# ---------------------------------------------------------------------------
# numba kernels

if HAS_NUMBA:

    @njit(cache=True)
    def _distinct_r2_nb(pts, limit):  # pragma: no cover - jitted
        n = pts.shape[0]
        flags = np.zeros(limit + 1, dtype=np.uint8)
        for i in range(n):
            for j in range(i + 1, n):
                ax = pts[j, 0] - pts[i, 0]
                ay = pts[j, 1] - pts[i, 1]
                for k in range(j + 1, n):
                    d = ax * (pts[k, 1] - pts[i, 1]) - ay * (pts[k, 0] - pts[i, 0])
                    if d < 0:
                        d = -d
                    if d != 0 and d <= limit:
                        flags[d] = 1
        return flags

    @njit(cache=True)
    def _distinct_r3_nb(pts, limit):  # pragma: no cover - jitted
        n = pts.shape[0]
        flags = np.zeros(limit + 1, dtype=np.uint8)
        for i in range(n):
            for j in range(i + 1, n):
                ax = pts[j, 0] - pts[i, 0]
                ay = pts[j, 1] - pts[i, 1]
                az = pts[j, 2] - pts[i, 2]
                for k in range(j + 1, n):
                    bx = pts[k, 0] - pts[i, 0]
                    by = pts[k, 1] - pts[i, 1]
                    bz = pts[k, 2] - pts[i, 2]
                    cx = ay * bz - az * by
                    cy = az * bx - ax * bz
                    cz = ax * by - ay * bx
                    for l in range(k + 1, n):
                        d = (
                            cx * (pts[l, 0] - pts[i, 0])
                            + cy * (pts[l, 1] - pts[i, 1])
                            + cz * (pts[l, 2] - pts[i, 2])
                        )
                        if d < 0:
                            d = -d
                        if d != 0 and d <= limit:
                            flags[d] = 1
        return flags

    @njit(cache=True)
    def _witness_r2_nb(pts, wanted, out):  # pragma: no cover - jitted
        n = pts.shape[0]
        limit = wanted.shape[0] - 1
        remaining = 0
        for v in range(limit + 1):
            if wanted[v] >= 0:
                remaining += 1
        for i in range(n):
            for j in range(i + 1, n):
                ax = pts[j, 0] - pts[i, 0]
                ay = pts[j, 1] - pts[i, 1]
                for k in range(j + 1, n):
                    d = ax * (pts[k, 1] - pts[i, 1]) - ay * (pts[k, 0] - pts[i, 0])
                    if d < 0:
                        d = -d
                    if 0 < d <= limit and wanted[d] >= 0:
                        t = wanted[d]
                        out[t, 0] = i
                        out[t, 1] = j
                        out[t, 2] = k
                        wanted[d] = -1
                        remaining -= 1
                        if remaining == 0:
                            return
        return

    @njit(cache=True)
    def _witness_r3_nb(pts, wanted, out):  # pragma: no cover - jitted
        n = pts.shape[0]
        limit = wanted.shape[0] - 1
        remaining = 0
        for v in range(limit + 1):
            if wanted[v] >= 0:
                remaining += 1
        for i in range(n):
            for j in range(i + 1, n):
                ax = pts[j, 0] - pts[i, 0]
                ay = pts[j, 1] - pts[i, 1]
                az = pts[j, 2] - pts[i, 2]
                for k in range(j + 1, n):
                    bx = pts[k, 0] - pts[i, 0]
                    by = pts[k, 1] - pts[i, 1]
                    bz = pts[k, 2] - pts[i, 2]
                    cx = ay * bz - az * by
                    cy = az * bx - ax * bz
                    cz = ax * by - ay * bx
                    for l in range(k + 1, n):
                        d = (
                            cx * (pts[l, 0] - pts[i, 0])
                            + cy * (pts[l, 1] - pts[i, 1])
                            + cz * (pts[l, 2] - pts[i, 2])
                        )
                        if d < 0:
                            d = -d
                        if 0 < d <= limit and wanted[d] >= 0:
                            t = wanted[d]
                            out[t, 0] = i
                            out[t, 1] = j
                            out[t, 2] = k
                            out[t, 3] = l
                            wanted[d] = -1
                            remaining -= 1
                            if remaining == 0:
                                return
        return


# ---------------------------------------------------------------------------
# numpy fallback

def _distinct_r2_np(pts: np.ndarray, limit: int) -> set[int]:
    n = pts.shape[0]
    values: set[int] = set()
    for i in range(n - 2):
        d = pts[i + 1 :] - pts[i]
        cross = np.abs(d[:, 0][:, None] * d[:, 1][None, :] - d[:, 1][:, None] * d[:, 0][None, :])
        tri = cross[np.triu_indices(d.shape[0], k=1)]
        tri = tri[(tri != 0) & (tri <= limit)]
        values.update(np.unique(tri).tolist())
    return values


def _distinct_r3_np(pts: np.ndarray, limit: int) -> set[int]:
    n = pts.shape[0]
    values: set[int] = set()
    for i in range(n - 3):
        d = pts[i + 1 :] - pts[i]
        m = d.shape[0]
        for a in range(m - 2):
            for b in range(a + 1, m - 1):
                cr = np.cross(d[a], d[b])
                dets = np.abs(d[b + 1 :] @ cr)
                dets = dets[(dets != 0) & (dets <= limit)]
                values.update(np.unique(dets).tolist())
    return values


def _witness_r2_np(pts: np.ndarray, targets: dict[int, int]) -> dict[int, tuple[int, ...]]:
    n = pts.shape[0]
    found: dict[int, tuple[int, ...]] = {}
    pending = set(targets)
    for i in range(n - 2):
        if not pending:
            break
        d = pts[i + 1 :] - pts[i]
        cross = np.abs(d[:, 0][:, None] * d[:, 1][None, :] - d[:, 1][:, None] * d[:, 0][None, :])
        cross = np.triu(cross, k=1)
        for t in sorted(pending):
            hits = np.argwhere(cross == t)
            if hits.size:
                a, b = hits[0]
                found[t] = (i, i + 1 + int(a), i + 1 + int(b))
                pending.discard(t)
    return found


def _witness_r3_np(pts: np.ndarray, targets: dict[int, int]) -> dict[int, tuple[int, ...]]:
    n = pts.shape[0]
    found: dict[int, tuple[int, ...]] = {}
    pending = set(targets)
    for i in range(n - 3):
        if not pending:
            break
        d = pts[i + 1 :] - pts[i]
        m = d.shape[0]
        for a in range(m - 2):
            if not pending:
                break
            for b in range(a + 1, m - 1):
                cr = np.cross(d[a], d[b])
                dets = np.abs(d[b + 1 :] @ cr)
                for t in sorted(pending):
                    hits = np.flatnonzero(dets == t)
                    if hits.size:
                        c = int(hits[0])
                        found[t] = (i, i + 1 + a, i + 1 + b, i + 1 + b + 1 + c)
                        pending.discard(t)
                if not pending:
                    break
    return found


# ---------------------------------------------------------------------------
# exact Python path (any rank, no overflow ceiling)

def _diff_det(points: Sequence[tuple[int, ...]], idx: tuple[int, ...]) -> int:
    base = points[idx[0]]
    cols = [[points[j][i] - base[i] for i in range(len(base))] for j in idx[1:]]
    return det_exact([[cols[j][i] for j in range(len(cols))] for i in range(len(base))])


def _distinct_py(points: Sequence[tuple[int, ...]], rank: int, limit: Optional[int]) -> set[int]:
    values: set[int] = set()
    for idx in combinations(range(len(points)), rank + 1):
        d = abs(_diff_det(points, idx))
        if d != 0 and (limit is None or d <= limit):
            values.add(d)
    return values


def _witness_py(
    points: Sequence[tuple[int, ...]], rank: int, targets: Sequence[int]
) -> dict[int, tuple[int, ...]]:
    pending = set(targets)
    found: dict[int, tuple[int, ...]] = {}
    for idx in combinations(range(len(points)), rank + 1):
        if not pending:
            break
        d = abs(_diff_det(points, idx))
        if d in pending:
            found[d] = idx
            pending.discard(d)
    return found


# ---------------------------------------------------------------------------
# dispatch

def distinct_abs_dets(
    points: Sequence[tuple[int, ...]], rank: int, cap: Optional[int] = None
) -> set[int]:
    """All nonzero |det| values of difference matrices over (rank+1)-subsets.

    ``cap`` restricts the result to values <= cap and lets the int64 backends
    bound their flag tables.
    """
    if len(points) < rank + 1:
        return set()
    backend = backend_name()
    if backend == "python":
        return _distinct_py(points, rank, cap)
    c = max(abs(x) for p in points for x in p)
    limit = det_bound(c, rank)
    if cap is not None:
        limit = min(limit, cap)
    if not _int64_ok(points, rank, limit):
        return _distinct_py(points, rank, cap)
    pts = np.asarray(points, dtype=np.int64)
    if backend == "numba":
        flags = _distinct_r2_nb(pts, limit) if rank == 2 else _distinct_r3_nb(pts, limit)
        return set(np.flatnonzero(flags).tolist())
    return _distinct_r2_np(pts, limit) if rank == 2 else _distinct_r3_np(pts, limit)


def find_det_witnesses(
    points: Sequence[tuple[int, ...]], rank: int, targets: Sequence[int]
) -> dict[int, tuple[int, ...]]:
    """First (lexicographic) index tuple realizing each target |det| value.

    Returns a map target -> (i_0 < ... < i_rank); absent targets are simply
    missing from the map.  The scan order is identical across backends.
    """
    targets = sorted({int(t) for t in targets if t > 0})
    if not targets or len(points) < rank + 1:
        return {}
    backend = backend_name()
    if backend == "python":
        return _witness_py(points, rank, targets)
    limit = max(targets)
    if not _int64_ok(points, rank, limit):
        return _witness_py(points, rank, targets)
    pts = np.asarray(points, dtype=np.int64)
    if backend == "numba":
        wanted = np.full(limit + 1, -1, dtype=np.int64)
        for t_idx, t in enumerate(targets):
            wanted[t] = t_idx
        out = np.full((len(targets), rank + 1), -1, dtype=np.int64)
        if rank == 2:
            _witness_r2_nb(pts, wanted, out)
        else:
            _witness_r3_nb(pts, wanted, out)
        return {
            t: tuple(int(x) for x in out[t_idx])
            for t_idx, t in enumerate(targets)
            if out[t_idx, 0] >= 0
        }
    lookup = {t: t for t in targets}
    if rank == 2:
        return _witness_r2_np(pts, lookup)
    return _witness_r3_np(pts, lookup)
