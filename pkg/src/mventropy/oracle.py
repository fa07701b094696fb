"""Brute-force reference for the minimum refinement entropy.

Independent of the vertex enumerator in :mod:`mventropy.polytope`: each
local polytope is parameterised by the non-pivot cells of an exact
row-reduced constraint system, scanned on a grid, and its vertices are
found by trying every square basis.  Only suitable for a handful of free
dimensions.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .partitions import NATURAL, EntropyValue
from .refine import _check_parts, local_polytopes


def _rref(rows, ncol):
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncol):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def _local_system(lp):
    cells = list(itertools.product(*lp.support_axes()))
    rows = []
    for t, idx in enumerate(lp.support_axes()):
        for i in idx:
            rows.append([Fraction(1 if c[t] == i else 0) for c in cells]
                        + [lp.axis_marginals[t][i]])
    return cells, rows


def _basis_vertices(cells, rows):
    """Every basic feasible solution, by trying all column subsets."""
    ncell = len(cells)
    _, piv = _rref(rows, ncell)
    rank = len(piv)
    found = set()
    for cols in itertools.combinations(range(ncell), rank):
        sub = [[r[c] for c in cols] + [r[-1]] for r in rows]
        red, p = _rref(sub, rank)
        if len(p) < rank:
            continue
        if any(all(x == 0 for x in r[:-1]) and r[-1] != 0 for r in red):
            continue
        x = [Fraction(0)] * ncell
        for r, pc in zip(red, p):
            x[cols[pc]] = r[-1]
        if all(v >= 0 for v in x) and _satisfies(rows, x):
            found.add(tuple(x))
    return sorted(found)


def _satisfies(rows, x):
    return all(sum(a * b for a, b in zip(r[:-1], x)) == r[-1] for r in rows)


def _free_cells(cells, rows):
    red, piv = _rref(rows, len(cells))
    return red, piv, [c for c in range(len(cells)) if c not in piv]


def _grid_points(cells, rows, resolution):
    ncell = len(cells)
    red, piv, free = _free_cells(cells, rows)
    # upper bound on a free cell: smallest marginal among its indices
    ubs = []
    for c in free:
        ubs.append(min(float(r[-1]) for r in rows if r[c] == 1))
    pts = []
    grids = [np.linspace(0.0, ub, resolution) for ub in ubs]
    for vals in itertools.product(*grids):
        x = [0.0] * ncell
        for c, v in zip(free, vals):
            x[c] = v
        for r, pc in zip(red, piv):
            x[pc] = float(r[-1]) - sum(float(r[c]) * x[c] for c in free)
        if min(x) >= -1e-12:
            pts.append([max(0.0, v) for v in x])
    return free, pts


def brute_force_oracle(parts, m, base=NATURAL, resolution: int = 101,
                       max_dim: int = 4, max_bases: int = 200_000) -> EntropyValue:
    """Minimum entropy over a grid of each local polytope plus its vertices."""
    parts, space = _check_parts(parts, m)
    shape = tuple(len(p) for p in parts)
    per_point = []
    dims = 0
    for w, lp in enumerate(local_polytopes(parts)):
        cells, rows = _local_system(lp)
        dims += len(_free_cells(cells, rows)[2])
        if dims > max_dim:
            raise DomainError(f"{dims} free dimensions exceed oracle limit {max_dim}")
        free, pts = _grid_points(cells, rows, resolution if len(cells) > 1 else 1)
        rank = len(cells) - len(free)
        if math.comb(len(cells), rank) <= max_bases:
            pts.extend([float(v) for v in x] for x in _basis_vertices(cells, rows))
        flat = [
            sum(i * math.prod(shape[t + 1:]) for t, i in enumerate(c)) for c in cells
        ]
        weight = float(space.weights[w])
        arr = np.zeros((len(pts), math.prod(shape)))
        arr[:, flat] = np.asarray(pts, dtype=float).reshape(len(pts), len(cells)) * weight
        per_point.append(arr)

    best = math.inf
    for combo in itertools.product(*(range(len(a)) for a in per_point[:-1])):
        masses = per_point[-1].copy()
        for a, j in zip(per_point[:-1], combo):
            masses += a[j]
        mm = np.clip(masses, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            h = -np.sum(np.where(mm > 0, mm * np.log(np.where(mm > 0, mm, 1.0)), 0.0), axis=1)
        best = min(best, float(h.min()))
    if base != NATURAL:
        best /= math.log(2.0)
    return EntropyValue(max(0.0, best), base)
