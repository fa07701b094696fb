"""Minimum-entropy common refinements.

The entropy of a refinement, ``sum_cells phi(mass)``, is concave in the
cell masses and the masses are linear in the per-point entries, so the
minimum over the feasible set (a product of per-point transportation
polytopes) is attained at a tuple of per-point vertices.
"""

from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np

from .errors import BudgetExceededError, DomainError, SpaceMismatchError
from .mv import StateM, _raw
from .partitions import (
    NATURAL,
    EntropyValue,
    Partition,
    RefinementTensor,
    entropy_H,
    entropy_of_masses,
    is_idempotent,
    product_refine,
    refine_lemma1_chain,
    tensor_entropy,
)
from .polytope import (
    LocalPolytope,
    enumerate_local_vertices,
    sample_greedy_vertices,
)

EXACT_CERT = "exact-vertex-enumeration"
HEURISTIC_CERT = "heuristic"
CRISP_CERT = "crisp-unique"

_CHUNK = 1 << 15


@dataclass(frozen=True)
class SolverConfig:
    mode: str = "auto"  # exact | heuristic | auto
    max_cells: int = 32
    max_combos: int = 5_000_000
    heuristic_iters: int = 50
    restarts: int = 4
    greedy_samples: int = 64
    seed: int = 0
    workers: int = 1
    tie_tol: float = 1e-12

    def __post_init__(self):
        if self.mode not in ("exact", "heuristic", "auto"):
            raise ValueError(f"unknown solver mode {self.mode!r}")
        if self.max_cells < 1 or self.max_combos < 1:
            raise ValueError("budgets must be positive")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class RefinementSolution:
    tensor: RefinementTensor
    entropy: EntropyValue
    certificate: str
    bound_gap: Optional[float] = None
    lower_bound: float = 0.0
    combos: int = 0


def _check_parts(parts, m):
    parts = list(parts)
    if not parts:
        raise DomainError("need at least one partition")
    space = parts[0].space
    for p in parts[1:]:
        if p.space != space:
            raise SpaceMismatchError("partitions live on different spaces")
    if m.space != space:
        raise SpaceMismatchError("partitions and state live on different spaces")
    return parts, space


def _snap(values, exact: bool):
    """Marginal vector as exact fractions summing to 1."""
    if exact:
        return tuple(values)
    fr = [Fraction(repr(float(v))) for v in values]
    s = sum(fr)
    if s != 1:
        j = max(range(len(fr)), key=lambda i: (fr[i], -i))
        fr[j] += 1 - s
    return tuple(fr)


def local_polytopes(parts: Sequence[Partition]) -> List[LocalPolytope]:
    space = parts[0].space
    exact = space.numeric.exact
    return [
        LocalPolytope(
            space.point_ids[w],
            tuple(_snap([e.values[w] for e in p], exact) for p in parts),
        )
        for w in range(len(space))
    ]


@lru_cache(maxsize=4096)
def _cached_vertices(margs, cell_cap):
    return tuple(enumerate_local_vertices(LocalPolytope(None, margs), cell_cap))


def _vertex_lists(lps, cell_cap, max_combos=None):
    for lp in lps:
        if lp.free_cells() > cell_cap:
            raise BudgetExceededError(
                f"{lp.free_cells()} free cells at point {lp.point_id!r} exceed cap {cell_cap}"
            )
    out, total = [], 1
    for lp in lps:
        out.append(list(_cached_vertices(lp.axis_marginals, cell_cap)))
        total *= len(out[-1])
        # stop enumerating once the scan is already over budget
        if max_combos is not None and total > max_combos:
            raise BudgetExceededError(
                f"more than {max_combos} vertex combinations (budget exceeded at point {lp.point_id!r})"
            )
    return out


def _group_points(lps, space):
    """Group points whose local polytopes coincide.

    For a convex set Q, ``a Q + b Q = (a + b) Q``, so points sharing their
    marginals can be searched as one slot carrying their total weight.
    Returns ``(slot_weights, slot_marginals, slot_of_point)``.
    """
    keys, weights, slot_of = [], [], []
    index = {}
    for lp, w in zip(lps, space.weights):
        key = lp.axis_marginals
        if key not in index:
            index[key] = len(keys)
            keys.append(key)
            weights.append(Fraction(0))
        slot = index[key]
        weights[slot] += Fraction(w) if space.numeric.exact else Fraction(repr(float(w)))
        slot_of.append(slot)
    return weights, keys, slot_of


class _Problem:
    """Float view of the product of per-slot vertex sets, for fast scanning."""

    def __init__(self, shape, weights, vertex_lists, base):
        self.shape = tuple(shape)
        self.base = base
        # a weightless slot cannot move the masses; pin it to its first vertex
        self.vertex_lists = [vl if w > 0 else vl[:1] for w, vl in zip(weights, vertex_lists)]
        self.weights = list(weights)
        ncell = math.prod(self.shape)
        live = set()
        for w, vl in zip(self.weights, self.vertex_lists):
            if w == 0:
                continue
            for v in vl:
                live.update(i for i, x in enumerate(v) if x != 0)
        self.live = sorted(live)
        self.ncell = ncell
        self.arrays = [
            np.array(
                [[float(w * v[i]) for i in self.live] for v in vl],
                dtype=float,
            ).reshape(len(vl), len(self.live))
            for w, vl in zip(self.weights, self.vertex_lists)
        ]

    @property
    def sizes(self):
        return [len(v) for v in self.vertex_lists]

    def exact_masses(self, choice):
        masses = [Fraction(0)] * self.ncell
        for s, j in enumerate(choice):
            pw = self.weights[s]
            if pw == 0:
                continue
            for i, x in enumerate(self.vertex_lists[s][j]):
                if x:
                    masses[i] += pw * x
        return tuple(masses)

    def exact_entropy(self, choice) -> float:
        return entropy_of_masses(self.exact_masses(choice), self.base)


def _phi_rows(masses: np.ndarray, base) -> np.ndarray:
    m = np.clip(masses, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(m > 0, -m * np.log(np.where(m > 0, m, 1.0)), 0.0)
    out = t.sum(axis=1)
    if base != NATURAL:
        out = out / math.log(2.0)
    return out


def _scan_chunk(arrays, sizes, start, stop, base, tie_tol):
    """Entropies of combos ``start..stop`` in mixed-radix order.

    Returns ``(chunk_min, [(entropy, combo_index), ...])`` for combos within
    ``tie_tol`` of the chunk minimum.
    """
    idx = np.arange(start, stop, dtype=np.int64)
    masses = None
    for arr, size in zip(reversed(arrays), reversed(sizes)):
        digit = idx % size
        idx = idx // size
        part = arr[digit]
        masses = part if masses is None else masses + part
    ent = _phi_rows(masses, base)
    lo = float(ent.min())
    keep = np.nonzero(ent <= lo + tie_tol)[0]
    return lo, [(float(ent[k]), start + int(k)) for k in keep]


def _decode(index, sizes):
    out = []
    for size in reversed(sizes):
        out.append(index % size)
        index //= size
    return tuple(reversed(out))


def _best_of(problem: _Problem, choices, tie_tol):
    """Deterministic pick: least exact entropy, ties by smallest mass vector."""
    scored = [(problem.exact_entropy(c), problem.exact_masses(c), c) for c in choices]
    lo = min(s[0] for s in scored)
    tied = [s for s in scored if s[0] <= lo + tie_tol]
    return min(tied, key=lambda s: s[1])


def _tensor_from_choice(parts, space, problem: _Problem, choice, slot_of) -> RefinementTensor:
    shape = problem.shape
    exact = space.numeric.exact
    cols = [problem.vertex_lists[slot_of[w]][choice[slot_of[w]]] for w in range(len(space))]
    entries = {}
    for flat, ix in enumerate(itertools.product(*(range(k) for k in shape))):
        vals = [c[flat] for c in cols]
        if not exact:
            vals = [float(v) for v in vals]
        entries[ix] = _raw(space, vals)
    return RefinementTensor(tuple(parts), entries)


def _solve_exact(parts, space, m, base, cfg: SolverConfig):
    lps = local_polytopes(parts)
    weights, keys, slot_of = _group_points(lps, space)
    slot_lps = [lps[slot_of.index(s)] for s in range(len(keys))]
    vls = _vertex_lists(slot_lps, cfg.max_cells, cfg.max_combos)
    problem = _Problem([len(p) for p in parts], weights, vls, base)
    sizes = problem.sizes
    total = math.prod(sizes)
    if total > cfg.max_combos:
        raise BudgetExceededError(
            f"{total} vertex combinations exceed budget {cfg.max_combos}"
        )
    bounds = [(s, min(s + _CHUNK, total)) for s in range(0, total, _CHUNK)]
    args = [(problem.arrays, sizes, a, b, base, cfg.tie_tol) for a, b in bounds]
    if cfg.workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(_scan_chunk, *zip(*args)))
    else:
        results = [_scan_chunk(*a) for a in args]
    lo = min(r[0] for r in results)
    cand = sorted(i for r in results for e, i in r[1] if e <= lo + cfg.tie_tol)
    ent, _, choice = _best_of(problem, [_decode(i, sizes) for i in cand], cfg.tie_tol)
    tensor = _tensor_from_choice(parts, space, problem, choice, slot_of)
    return tensor, total


def _descend(problem: _Problem, choice, cfg: SolverConfig):
    """Coordinate descent: re-pick one point's vertex with the others fixed."""
    choice = list(choice)
    current = sum(problem.arrays[w][j] for w, j in enumerate(choice))
    best = float(_phi_rows(current[None, :], problem.base)[0])
    for _ in range(cfg.heuristic_iters):
        improved = False
        for w, arr in enumerate(problem.arrays):
            if len(arr) <= 1:
                continue
            rest = current - arr[choice[w]]
            ent = _phi_rows(rest[None, :] + arr, problem.base)
            j = int(np.argmin(ent))
            if ent[j] < best - 1e-15:
                best = float(ent[j])
                choice[w] = j
                current = rest + arr[j]
                improved = True
        if not improved:
            break
    return tuple(choice)


def _slice(tensor: RefinementTensor, w, exact):
    vals = (tensor.entries[ix].values[w] for ix in tensor.indices())
    return tuple(Fraction(v) if exact else Fraction(repr(float(v))) for v in vals)


def _solve_heuristic(parts, space, m, base, cfg: SolverConfig):
    rng = random.Random(cfg.seed)
    lps = local_polytopes(parts)
    weights, keys, slot_of = _group_points(lps, space)
    exact = space.numeric.exact
    starts = [refine_lemma1_chain(parts), product_refine(parts)]
    pools = []
    for s in range(len(keys)):
        w = slot_of.index(s)
        lp = lps[w]
        pool = set()
        if lp.free_cells() <= min(cfg.max_cells, 16):
            pool.update(_cached_vertices(lp.axis_marginals, cfg.max_cells))
        else:
            pool.update(sample_greedy_vertices(lp, cfg.greedy_samples, rng))
        seeds = [_slice(t, w, exact) for t in starts]
        seeds = [v if lp.is_feasible(v) else None for v in seeds]
        pool.update(v for v in seeds if v is not None)
        pools.append((sorted(pool), seeds))
    problem = _Problem([len(p) for p in parts], weights, [p for p, _ in pools], base)
    sizes = problem.sizes
    initial = []
    for k in range(len(starts)):
        if all(seeds[k] is not None for _, seeds in pools):
            initial.append(tuple(
                min(pool.index(seeds[k]), size - 1) for (pool, seeds), size in zip(pools, sizes)
            ))
    for _ in range(cfg.restarts):
        initial.append(tuple(rng.randrange(size) for size in sizes))
    finals = [_descend(problem, c, cfg) for c in initial]
    _, _, choice = _best_of(problem, sorted(set(finals)), cfg.tie_tol)
    return _tensor_from_choice(parts, space, problem, choice, slot_of)


def _lower_bound(parts, m, base) -> float:
    return max(entropy_H(p, m, base).value for p in parts)


def min_entropy_refinement(
    parts: Sequence[Partition],
    m: StateM,
    base=NATURAL,
    config: SolverConfig = DEFAULT_CONFIG,
    mode: Optional[str] = None,
) -> RefinementSolution:
    """Common refinement of ``parts`` with the least entropy.

    When at most one input is fuzzy the product refinement is the only
    refinement and is returned directly.  ``exact`` enumerates every tuple of per-point vertices;
    ``heuristic`` runs coordinate descent from the chained Riesz refinement,
    the product refinement and random restarts; ``auto`` tries exact and
    falls back on budget overflow.
    """
    parts, space = _check_parts(parts, m)
    mode = mode or config.mode
    lb = _lower_bound(parts, m, base)

    # crisp axes pin one index per point, leaving one feasible tensor when
    # at most one axis is fuzzy
    fuzzy = sum(not is_idempotent(p) for p in parts)
    if fuzzy == 0 or (fuzzy == 1 and len(parts) > 1):
        tensor = product_refine(parts)
        h = tensor_entropy(tensor, m, base)
        # a lone fuzzy axis is forced too, but the crisp certificate is
        # kept for all-crisp inputs
        cert = CRISP_CERT if fuzzy == 0 else EXACT_CERT
        return RefinementSolution(tensor, h, cert, None, lb, 1)

    if len(parts) == 1:
        tensor = RefinementTensor(tuple(parts), {(i,): e for i, e in enumerate(parts[0])})
        return RefinementSolution(tensor, entropy_H(parts[0], m, base), EXACT_CERT, None, lb, 1)

    if mode in ("exact", "auto"):
        try:
            tensor, combos = _solve_exact(parts, space, m, base, config)
            h = tensor_entropy(tensor, m, base)
            return RefinementSolution(tensor, h, EXACT_CERT, None, lb, combos)
        except BudgetExceededError:
            if mode == "exact":
                raise
    tensor = _solve_heuristic(parts, space, m, base, config)
    h = tensor_entropy(tensor, m, base)
    return RefinementSolution(tensor, h, HEURISTIC_CERT, max(0.0, h.value - lb), lb, 0)
