"""Dynamical entropy: H_n, its Fekete limit, the product-join variant and
the classical Kolmogorov-Sinai computation on crisp partitions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

from .errors import IsomorphismError, NotIdempotentError, SpaceMismatchError
from .mv import DynamicalSystem, FiniteSpace, TransformationTau, _raw
from .partitions import (
    NATURAL,
    Partition,
    entropy_of_masses,
    h_parallel,
    is_idempotent,
    product_masses,
    tau_partition,
)
from .refine import (
    CRISP_CERT,
    DEFAULT_CONFIG,
    EXACT_CERT,
    RefinementSolution,
    SolverConfig,
    min_entropy_refinement,
)

SUBADD_TOL = 1e-9


@dataclass
class EntropySequence:
    """``H_1..H_N`` with per-step ratios and their running infimum."""

    values: List[float]
    certificates: List[str] = field(default_factory=list)
    per_step: List[float] = field(init=False)
    running_inf: List[float] = field(init=False)
    violations: List[Tuple[int, int, float]] = field(init=False)

    def __post_init__(self):
        self.per_step = [v / n for n, v in enumerate(self.values, start=1)]
        self.running_inf = list(itertools.accumulate(self.per_step, min))
        self.violations = []
        N = len(self.values)
        for n in range(1, N):
            for k in range(1, N - n + 1):
                excess = self.values[n + k - 1] - self.values[n - 1] - self.values[k - 1]
                if excess > SUBADD_TOL:
                    self.violations.append((n, k, excess))

    @property
    def exact(self) -> bool:
        return all(c in (EXACT_CERT, CRISP_CERT, "product") for c in self.certificates)

    @property
    def is_subadditive(self) -> bool:
        return not self.violations

    @property
    def estimate(self) -> float:
        return self.running_inf[-1]


def orbit_partitions(sys: DynamicalSystem, A: Partition, n: int) -> List[Partition]:
    """``A, tau(A), ..., tau^(n-1)(A)``."""
    if A.space != sys.space:
        raise SpaceMismatchError("partition does not live on the system's space")
    out = [A]
    for _ in range(n - 1):
        out.append(tau_partition(sys.tau, out[-1]))
    return out


def H_n(sys: DynamicalSystem, A: Partition, n: int, config: SolverConfig = DEFAULT_CONFIG,
        base=NATURAL) -> RefinementSolution:
    """Least entropy over common refinements of ``A, tau(A), ..., tau^(n-1)(A)``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    return min_entropy_refinement(orbit_partitions(sys, A, n), sys.state, base, config)


def entropy_sequence(sys, A, n_max, config=DEFAULT_CONFIG, base=NATURAL) -> EntropySequence:
    sols = [H_n(sys, A, n, config, base) for n in range(1, n_max + 1)]
    return EntropySequence([s.entropy.value for s in sols], [s.certificate for s in sols])


def h_of_partition(sys, A, n_max: int, config=DEFAULT_CONFIG, base=NATURAL):
    """Estimate ``lim H_n / n`` by the running infimum of ``H_k / k``.

    The sequence is subadditive, so the limit equals the infimum and the
    estimate is an upper bound that converges to it.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    seq = entropy_sequence(sys, A, n_max, config, base)
    return seq.estimate, seq


def h_of_system(sys, library: Sequence[Partition], n_max: int, config=DEFAULT_CONFIG,
                base=NATURAL) -> float:
    """Largest ``h(A)`` estimate over ``library``.

    A lower bound on the entropy of the system, which takes the supremum
    over every partition.
    """
    library = list(library)
    if not library:
        raise ValueError("partition library is empty")
    return max(h_of_partition(sys, A, n_max, config, base)[0] for A in library)


def join_entropy(sys, A, n, base=NATURAL) -> float:
    """Entropy of the product join ``A ∨ tau(A) ∨ ... ∨ tau^(n-1)(A)``."""
    return entropy_of_masses(product_masses(orbit_partitions(sys, A, n), sys.state).values(), base)


def h_bar(sys, A, n_max: int, base=NATURAL):
    values = [join_entropy(sys, A, n, base) for n in range(1, n_max + 1)]
    seq = EntropySequence(values, ["product"] * n_max)
    return seq.per_step[-1], seq


def maliczky_vs_product_check(sys, A, n, config=DEFAULT_CONFIG, base=NATURAL, tol=1e-9):
    hn = H_n(sys, A, n, config, base).entropy.value
    hj = join_entropy(sys, A, n, base)
    return hn, hj, hn <= hj + tol


def classical_join_masses(space: FiniteSpace, T, crisp_partition, n: int) -> List:
    """Weights of the nonempty atoms of the join of ``T^-i(A)``, ``i < n``.

    ``crisp_partition`` is a :class:`Partition` of indicator functions or a
    list of point sets.  Computed from set intersections only.
    """
    point_map = T.point_map if isinstance(T, TransformationTau) else tuple(T)
    if isinstance(crisp_partition, Partition):
        if not is_idempotent(crisp_partition):
            raise NotIdempotentError("classical entropy needs a crisp partition")
        blocks = [frozenset(w for w, v in enumerate(e.values) if v == 1 or v > 0.5)
                  for e in crisp_partition]
    else:
        blocks = [frozenset(b) for b in crisp_partition]
    points = range(len(space))
    if set().union(*blocks) != set(points) or sum(map(len, blocks)) != len(space):
        raise NotIdempotentError("blocks do not partition the space")

    def preimage(block, i):
        # T^-i(B) = {w : T^i(w) in B}
        out = set()
        for w in points:
            x = w
            for _ in range(i):
                x = point_map[x]
            if x in block:
                out.add(w)
        return frozenset(out)

    layers = [[preimage(b, i) for b in blocks] for i in range(n)]
    atoms = [frozenset(points)]
    for layer in layers:
        atoms = [a & b for a in atoms for b in layer if a & b]
    return [sum(space.weights[w] for w in atom) for atom in atoms]


def classical_ks_oracle(space: FiniteSpace, T, crisp_partition, n: int, base=NATURAL) -> float:
    """Kolmogorov-Sinai entropy of the ``n``-step join of a crisp partition."""
    return entropy_of_masses(classical_join_masses(space, T, crisp_partition, n), base)


def map_order(point_map) -> Optional[int]:
    """Least ``p >= 1`` with ``T^p = id``, or None when ``T`` is not a bijection."""
    point_map = tuple(point_map)
    if sorted(point_map) != list(range(len(point_map))):
        return None
    order = 1
    seen = set()
    for start in range(len(point_map)):
        if start in seen:
            continue
        length, x = 0, start
        while x not in seen:
            seen.add(x)
            x = point_map[x]
            length += 1
        order = order * length // math.gcd(order, length)
    return order


def is_stabilized(sys: DynamicalSystem, seq: EntropySequence, tol: float = 1e-12) -> bool:
    """True when ``H_n`` is provably constant from ``n = N`` on.

    If ``tau^p`` is the identity the orbit axes repeat with period ``p``, so
    ``H_n = H_p`` for every ``n >= p`` and ``h = lim H_n / n = 0``.  Needs
    ``p < N`` and an exact-looking sequence so the plateau is observed too.
    """
    p = map_order(sys.tau.point_map)
    N = len(seq.values)
    if p is None or p >= N or not seq.exact:
        return False
    return all(abs(v - seq.values[p - 1]) <= tol for v in seq.values[p - 1:])


class CrispBoundResult(NamedTuple):
    lhs: float
    rhs: float
    holds: bool
    stabilized: bool
    lhs_limit: Optional[float]
    rhs_limit: Optional[float]


def theorem4_check(sys, A, B, n_max, config=DEFAULT_CONFIG, base=NATURAL, slack=1e-9):
    """Compare ``h(B)`` against ``h(A) + H(B || A)`` for crisp ``A``.

    ``lhs`` and ``rhs`` are the raw running-infimum estimates at ``n_max``.
    These overshoot the limits at finite horizon, so ``holds`` compares the
    limits when both sequences have stabilized (both are then 0) and falls
    back to the raw estimates otherwise.
    """
    if not is_idempotent(A):
        raise NotIdempotentError("A must consist of idempotent elements")
    seq_b = entropy_sequence(sys, B, n_max, config, base)
    seq_a = entropy_sequence(sys, A, n_max, config, base)
    par = h_parallel(B, A, sys.state, base).value
    lhs, rhs = seq_b.estimate, seq_a.estimate + par
    stable = is_stabilized(sys, seq_a) and is_stabilized(sys, seq_b)
    if stable:
        lhs_lim, rhs_lim = 0.0, 0.0 + par
        holds = lhs_lim <= rhs_lim + slack
    else:
        lhs_lim = rhs_lim = None
        holds = lhs <= rhs + slack
    return CrispBoundResult(lhs, rhs, holds, stable, lhs_lim, rhs_lim)


@dataclass(frozen=True)
class IsomorphismMap:
    """Weight-preserving bijection ``sigma`` from source points to target points.

    ``bijection[i]`` is the target index of source point ``i``.
    """

    source: FiniteSpace
    target: FiniteSpace
    bijection: Tuple[int, ...]

    def __post_init__(self):
        sig = tuple(int(j) for j in self.bijection)
        n = len(self.source)
        if len(self.target) != n or len(sig) != n or sorted(sig) != list(range(n)):
            raise IsomorphismError("point map is not a bijection between the spaces")
        num = self.source.numeric
        for i, j in enumerate(sig):
            if not num.eq(self.source.weights[i], self.target.numeric.coerce(self.target.weights[j])):
                raise IsomorphismError(
                    f"point {i} has weight {self.source.weights[i]} but its image {j} "
                    f"has weight {self.target.weights[j]}"
                )
        object.__setattr__(self, "bijection", sig)

    @property
    def inverse(self) -> Tuple[int, ...]:
        inv = [0] * len(self.bijection)
        for i, j in enumerate(self.bijection):
            inv[j] = i
        return tuple(inv)

    def check_commutes(self, sys1: DynamicalSystem, sys2: DynamicalSystem):
        """Raise unless ``T2 o sigma = sigma o T1``."""
        if sys1.space != self.source or sys2.space != self.target:
            raise IsomorphismError("systems do not match the bijection's spaces")
        s, T1, T2 = self.bijection, sys1.tau.point_map, sys2.tau.point_map
        for i in range(len(s)):
            if T2[s[i]] != s[T1[i]]:
                raise IsomorphismError(f"bijection does not commute with the maps at point {i}")

    def element(self, a):
        """``psi(a) = a o sigma^-1``."""
        if a.space != self.source:
            raise SpaceMismatchError("element does not live on the source space")
        inv = self.inverse
        return _raw(self.target, (a.values[inv[j]] for j in range(len(inv))))


def transport_system(sys: DynamicalSystem, iso: IsomorphismMap) -> DynamicalSystem:
    """The system carried to the target space: ``T2 = sigma o T1 o sigma^-1``."""
    if sys.space != iso.source:
        raise IsomorphismError("system does not live on the bijection's source space")
    s, inv, T1 = iso.bijection, iso.inverse, sys.tau.point_map
    T2 = tuple(s[T1[inv[j]]] for j in range(len(s)))
    return DynamicalSystem(iso.target, TransformationTau(iso.target, T2))


def transport_partition(A: Partition, iso: IsomorphismMap) -> Partition:
    return Partition(tuple(iso.element(a) for a in A))
