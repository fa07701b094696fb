"""Extreme points of multi-marginal transportation polytopes at one point.

At a single point of the space a common refinement of ``n`` partitions is a
nonnegative ``k_1 x ... x k_n`` array whose axis sums are the partitions'
values at that point.  Vertices are computed exactly with integer
arithmetic by the double description method applied to the homogenised
cone ``{x >= 0 : (axis sums of x) = (total of x) * marginals}``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from .errors import BudgetExceededError, DomainError

Vertex = Tuple[Fraction, ...]


@dataclass(frozen=True)
class LocalPolytope:
    """Axis marginal vectors of a refinement restricted to one point."""

    point_id: object
    axis_marginals: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        margs = tuple(tuple(Fraction(x) for x in a) for a in self.axis_marginals)
        if not margs or any(len(a) == 0 for a in margs):
            raise DomainError("every axis needs at least one index")
        totals = {sum(a) for a in margs}
        if len(totals) != 1:
            raise DomainError(f"axis marginals have different totals {sorted(totals)}")
        if any(x < 0 for a in margs for x in a):
            raise DomainError("negative marginal value")
        object.__setattr__(self, "axis_marginals", margs)

    @property
    def shape(self):
        return tuple(len(a) for a in self.axis_marginals)

    @property
    def total(self) -> Fraction:
        return sum(self.axis_marginals[0])

    def support_axes(self):
        """Indices with nonzero marginal, per axis; other cells are forced to 0."""
        return [tuple(i for i, x in enumerate(a) if x != 0) for a in self.axis_marginals]

    def free_cells(self) -> int:
        return math.prod(len(s) for s in self.support_axes())

    def is_feasible(self, vertex: Sequence[Fraction]) -> bool:
        shape = self.shape
        if len(vertex) != math.prod(shape) or any(v < 0 for v in vertex):
            return False
        sums = [[Fraction(0)] * k for k in shape]
        for ix, v in zip(itertools.product(*(range(k) for k in shape)), vertex):
            for t, i in enumerate(ix):
                sums[t][i] += v
        return all(tuple(s) == a for s, a in zip(sums, self.axis_marginals))


def _flat_index(shape, ix):
    f = 0
    for k, i in zip(shape, ix):
        f = f * k + i
    return f


def _embed(lp: LocalPolytope, cells, values) -> Vertex:
    shape = lp.shape
    out = [Fraction(0)] * math.prod(shape)
    for c, v in zip(cells, values):
        out[_flat_index(shape, c)] = v
    return tuple(out)


def _popcount(arr):
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(arr)
    bytes_ = arr.view(np.uint8).reshape(arr.shape + (8,))
    return np.unpackbits(bytes_, axis=-1).sum(axis=-1)


def _adjacent_pairs(pos, neg, masks, depth, ncell, block=512):
    """Yield ``(pos vec, pos mask, pos slack, neg index)`` for adjacent pairs.

    Two rays are adjacent when no third ray has its support inside the
    union of theirs.  An extreme ray of a cone cut by ``depth`` independent
    hyperplanes from the orthant also has at most ``depth + 1`` nonzeros.
    """
    if not pos or not neg:
        return
    if ncell > 64:
        for pv, pm, ps in pos:
            for k, (_, nm, _) in enumerate(neg):
                union = pm | nm
                if union.bit_count() > depth + 1:
                    continue
                if any(m != pm and m != nm and m & ~union == 0 for m in masks):
                    continue
                yield pv, pm, ps, k
        return
    all_m = np.array(masks, dtype=np.uint64)
    neg_m = np.array([nm for _, nm, _ in neg], dtype=np.uint64)
    for pv, pm, ps in pos:
        pm_ = np.uint64(pm)
        unions = neg_m | pm_
        cand = np.nonzero(_popcount(unions) <= depth + 1)[0]
        for lo in range(0, len(cand), block):
            ks = cand[lo:lo + block]
            u = unions[ks][:, None]
            inside = (all_m[None, :] & ~u) == 0
            inside &= all_m[None, :] != pm_
            inside &= all_m[None, :] != neg_m[ks][:, None]
            for k in ks[~inside.any(axis=1)]:
                yield pv, pm, ps, int(k)


def enumerate_local_vertices(lp: LocalPolytope, cell_cap: int = 256) -> List[Vertex]:
    """All extreme points of the local polytope, sorted lexicographically.

    Vertices are flattened in lexicographic multi-index order over the full
    shape.  Raises :class:`BudgetExceededError` when the number of cells
    left after removing zero-marginal indices exceeds ``cell_cap``.
    """
    supp = lp.support_axes()
    total = lp.total
    cells = list(itertools.product(*supp))
    if len(cells) > cell_cap:
        raise BudgetExceededError(
            f"{len(cells)} free cells at point {lp.point_id!r} exceed cap {cell_cap}"
        )
    if total == 0:
        return [_embed(lp, [], [])]
    if len(cells) == 1:
        return [_embed(lp, cells, [total])]

    ncell = len(cells)
    rows = []
    for t, idx in enumerate(supp):
        # the last kept index of each axis is implied by the others
        for i in idx[:-1]:
            share = lp.axis_marginals[t][i] / total
            den = share.denominator
            num = share.numerator
            rows.append([den * (1 if c[t] == i else 0) - num for c in cells])

    # double description: start from the orthant, cut by one hyperplane at a time
    rays = [(tuple(1 if j == c else 0 for j in range(ncell)), 1 << c) for c in range(ncell)]
    for depth, row in enumerate(rows, start=1):
        zero, pos, neg = [], [], []
        for vec, mask in rays:
            s = sum(r * x for r, x in zip(row, vec) if x)
            if s == 0:
                zero.append((vec, mask))
            elif s > 0:
                pos.append((vec, mask, s))
            else:
                neg.append((vec, mask, s))
        masks = [mask for _, mask in rays]
        new = list(zero)
        for pv, pm, ps, k in _adjacent_pairs(pos, neg, masks, depth, ncell):
            nv, nm, ns = neg[k]
            vec = tuple(-ns * a + ps * b for a, b in zip(pv, nv))
            g = math.gcd(*vec)
            new.append((tuple(x // g for x in vec), pm | nm))
        rays = new

    shape = lp.shape
    flat = [_flat_index(shape, c) for c in cells]
    size = math.prod(shape)
    zero = Fraction(0)
    verts = set()
    for vec, _ in rays:
        s = sum(vec)
        out = [zero] * size
        for f, x in zip(flat, vec):
            if x:
                out[f] = Fraction(x * total.numerator, s * total.denominator)
        verts.add(tuple(out))
    return sorted(verts)


def _greedy_fill(lp: LocalPolytope, order) -> Vertex:
    resid = [list(a) for a in lp.axis_marginals]
    cells, vals = [], []
    for c in order:
        v = min(resid[t][i] for t, i in enumerate(c))
        if v > 0:
            for t, i in enumerate(c):
                resid[t][i] -= v
            cells.append(c)
            vals.append(v)
    return _embed(lp, cells, vals)


def greedy_vertices(lp: LocalPolytope, limit: int = 100000) -> List[Vertex]:
    """Vertices reachable by repeatedly saturating one cell.

    A cell is set to the smallest residual marginal among its indices and
    the residuals are reduced; every cell order is explored up to identical
    residual states.  For two axes this finds every vertex; with three or
    more axes fractional vertices are missed, so this serves as a
    cross-check and as a candidate generator for the heuristic solver.
    """
    supp = lp.support_axes()
    cells = list(itertools.product(*supp))
    found = set()
    seen = set()
    stack = [(tuple(tuple(a) for a in lp.axis_marginals), ())]
    while stack:
        resid, assigned = stack.pop()
        key = (resid, assigned)
        if key in seen:
            continue
        seen.add(key)
        if len(seen) > limit:
            raise BudgetExceededError(f"greedy enumeration exceeded {limit} states")
        live = [c for c in cells if all(resid[t][i] > 0 for t, i in enumerate(c))]
        if not live:
            found.add(_embed(lp, [c for c, _ in assigned], [v for _, v in assigned]))
            continue
        for c in live:
            v = min(resid[t][i] for t, i in enumerate(c))
            nr = [list(a) for a in resid]
            for t, i in enumerate(c):
                nr[t][i] -= v
            stack.append((tuple(tuple(a) for a in nr), tuple(sorted(assigned + ((c, v),)))))
    return sorted(found)


def sample_greedy_vertices(lp: LocalPolytope, count: int, rng: random.Random) -> List[Vertex]:
    """Greedy vertices from ``count`` random cell orders (deduplicated, sorted)."""
    cells = list(itertools.product(*lp.support_axes()))
    out = set()
    for _ in range(count):
        rng.shuffle(cells)
        out.add(_greedy_fill(lp, cells))
    return sorted(out)
