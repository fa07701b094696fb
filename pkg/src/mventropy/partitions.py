"""Partitions of unity, their entropies and common refinements."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

from .errors import DomainError, InvariantViolation, SpaceMismatchError
from .mv import (
    FiniteSpace,
    MvElement,
    StateM,
    TransformationTau,
    _raw,
    product,
    state_eval,
    tau_apply,
)

NATURAL = "e"
BASE2 = "2"
_LN2 = math.log(2.0)


def _check_base(base):
    if base not in (NATURAL, BASE2):
        raise ValueError(f"log base must be 'e' or '2', got {base!r}")


@dataclass(frozen=True, order=True)
class EntropyValue:
    value: float
    log_base: str = NATURAL

    def __float__(self):
        return float(self.value)

    def __str__(self):
        return f"{self.value:.8f} ({'nats' if self.log_base == NATURAL else 'bits'})"


def phi(x, base=NATURAL, tol=1e-12) -> float:
    """``-x log x`` with ``phi(0) = 0``."""
    _check_base(base)
    if x < -tol or x > 1 + tol:
        raise DomainError(f"phi is defined on [0, 1], got {x}")
    if x <= 0:
        return 0.0
    xf = min(float(x), 1.0)
    if xf <= 0.0:
        return 0.0
    v = -xf * math.log(xf)
    return v / _LN2 if base == BASE2 else v


def entropy_of_masses(masses, base=NATURAL) -> float:
    """Sum of ``phi`` over masses, order-independent to the last bit.

    Terms are summed in sorted order with :func:`math.fsum`, so any
    permutation of the same masses yields the identical float.
    """
    terms = sorted(phi(x, base) for x in masses)
    return max(0.0, math.fsum(terms))


@dataclass(frozen=True)
class Partition:
    """Ordered elements summing pointwise to the unit."""

    elements: tuple

    def __post_init__(self):
        els = tuple(self.elements)
        if not els:
            raise DomainError("a partition needs at least one element")
        space = els[0].space
        for e in els[1:]:
            if e.space != space:
                raise SpaceMismatchError("partition elements live on different spaces")
        num = space.numeric
        for w in range(len(space)):
            s = sum((e.values[w] for e in els), num.zero())
            if not num.eq(s, 1):
                raise DomainError(
                    f"elements sum to {s} at point {w}, not 1 (not a partition of unity)"
                )
        object.__setattr__(self, "elements", els)

    @classmethod
    def from_rows(cls, space: FiniteSpace, rows) -> "Partition":
        """Build from a k x |points| matrix of values."""
        return cls(tuple(MvElement(space, r) for r in rows))

    @property
    def space(self) -> FiniteSpace:
        return self.elements[0].space

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def rows(self):
        return [e.values for e in self.elements]


def _same_space(parts) -> FiniteSpace:
    space = parts[0].space
    for p in parts[1:]:
        if p.space != space:
            raise SpaceMismatchError("partitions live on different spaces")
    return space


@dataclass(frozen=True)
class RefinementTensor:
    """Common refinement indexed by one element of each axis partition.

    ``entries`` maps every multi-index ``(i_1, ..., i_n)`` to an element;
    summing entries over all indices with ``i_t = i`` gives element ``i``
    of axis partition ``t``.
    """

    axis_partitions: tuple
    entries: Dict[Tuple[int, ...], MvElement]

    def __post_init__(self):
        axes = tuple(self.axis_partitions)
        if not axes:
            raise DomainError("a refinement needs at least one axis")
        object.__setattr__(self, "axis_partitions", axes)
        self.validate()

    @property
    def space(self) -> FiniteSpace:
        return self.axis_partitions[0].space

    @property
    def shape(self):
        return tuple(len(p) for p in self.axis_partitions)

    def indices(self):
        return itertools.product(*(range(k) for k in self.shape))

    def validate(self):
        space = _same_space(self.axis_partitions)
        num = space.numeric
        shape = self.shape
        missing = [ix for ix in self.indices() if ix not in self.entries]
        if missing or len(self.entries) != math.prod(shape):
            raise InvariantViolation(f"tensor entries do not cover shape {shape}")
        npts = len(space)
        sums = [[[num.zero()] * npts for _ in range(k)] for k in shape]
        for ix, e in self.entries.items():
            if e.space != space:
                raise SpaceMismatchError("tensor entry lives on another space")
            for w, v in enumerate(e.values):
                if v < -num.tol:
                    raise InvariantViolation(f"negative entry at {ix}, point {w}")
                for t, i in enumerate(ix):
                    sums[t][i][w] += v
        for t, part in enumerate(self.axis_partitions):
            for i, el in enumerate(part.elements):
                for w in range(npts):
                    if not num.eq(sums[t][i][w], el.values[w]):
                        raise InvariantViolation(
                            f"marginal of axis {t}, index {i} is {sums[t][i][w]} "
                            f"at point {w}, expected {el.values[w]}"
                        )

    def masses(self, m: StateM = None) -> Dict[Tuple[int, ...], object]:
        m = m or StateM(self.space)
        return {ix: state_eval(m, e) for ix, e in self.entries.items()}

    def flat_masses(self, m: StateM = None):
        """Cell masses in lexicographic multi-index order."""
        ms = self.masses(m)
        return tuple(ms[ix] for ix in self.indices())

    def as_partition(self) -> Partition:
        """Flatten into a partition, cells in lexicographic index order."""
        return Partition(tuple(self.entries[ix] for ix in self.indices()))


def entropy_H(A: Partition, m: StateM, base=NATURAL) -> EntropyValue:
    """``sum_i phi(m(a_i))``."""
    _check_base(base)
    if A.space != m.space:
        raise SpaceMismatchError("partition and state live on different spaces")
    return EntropyValue(entropy_of_masses((state_eval(m, a) for a in A), base), base)


def tensor_entropy(C: RefinementTensor, m: StateM, base=NATURAL) -> EntropyValue:
    """Entropy of the refinement viewed as a partition (one term per cell)."""
    _check_base(base)
    if C.space != m.space:
        raise SpaceMismatchError("tensor and state live on different spaces")
    return EntropyValue(entropy_of_masses(C.masses(m).values(), base), base)


def _conditional(pair_masses, cond_masses, base) -> float:
    terms = []
    for (i, j), c in pair_masses.items():
        b = cond_masses[j]
        if b == 0:
            continue
        terms.append(float(b) * phi(min(1, c / b) if c > 0 else 0, base))
    return max(0.0, math.fsum(sorted(terms)))


def conditional_entropy(C: RefinementTensor, m: StateM, base=NATURAL,
                        given: int = 1) -> EntropyValue:
    """``H_C(A | B) = sum_ij m(b_j) phi(m(c_ij) / m(b_j))``.

    ``C`` has axes ``(A, B)``.  ``given`` picks the conditioning axis, so
    ``given=0`` yields ``H_C(B | A)``.  Terms with ``m(b_j) = 0`` vanish.
    """
    _check_base(base)
    if len(C.axis_partitions) != 2:
        raise DomainError("conditional entropy needs a 2-axis refinement")
    if given not in (0, 1):
        raise ValueError("given must be 0 or 1")
    if C.space != m.space:
        raise SpaceMismatchError("tensor and state live on different spaces")
    cond = [state_eval(m, b) for b in C.axis_partitions[given]]
    masses = C.masses(m)
    if given == 0:
        masses = {(j, i): v for (i, j), v in masses.items()}
    return EntropyValue(_conditional(masses, cond, base), base)


def refine_lemma1(A: Partition, B: Partition) -> RefinementTensor:
    """Common refinement built by repeated Riesz decomposition.

    Row ``i`` spreads ``a_i`` over the capacities ``b_j`` left over by the
    earlier rows, taking pointwise minima left to right; the last row takes
    what remains of each ``b_j``.
    """
    space = _same_space([A, B])
    num = space.numeric
    zero = num.zero()
    npts = len(space)
    residual = [list(b.values) for b in B]
    entries = {}
    n = len(A)
    for i, a in enumerate(A):
        if i == n - 1:
            for j in range(len(B)):
                entries[(i, j)] = _raw(space, (max(zero, r) for r in residual[j]))
            break
        remaining = list(a.values)
        for j in range(len(B)):
            c = [min(remaining[w], residual[j][w]) for w in range(npts)]
            if not num.exact:
                c = [max(0.0, x) for x in c]
            for w in range(npts):
                remaining[w] -= c[w]
                residual[j][w] -= c[w]
            entries[(i, j)] = _raw(space, c)
    return RefinementTensor((A, B), entries)


def refine_lemma1_chain(parts: Sequence[Partition]) -> RefinementTensor:
    """Extend :func:`refine_lemma1` to any number of partitions.

    The running refinement is flattened to a partition and refined against
    the next axis.
    """
    parts = list(parts)
    _same_space(parts)
    current = RefinementTensor(
        (parts[0],), {(i,): e for i, e in enumerate(parts[0].elements)}
    )
    for nxt in parts[1:]:
        order = list(current.indices())
        two = refine_lemma1(current.as_partition(), nxt)
        entries = {
            order[r] + (j,): e for (r, j), e in two.entries.items()
        }
        current = RefinementTensor(current.axis_partitions + (nxt,), entries)
    return current


def product_refine(parts: Sequence[Partition]) -> RefinementTensor:
    """Refinement whose cells are pointwise products ``a_i1 . b_i2 ...``."""
    parts = list(parts)
    if not parts:
        raise DomainError("need at least one partition")
    _same_space(parts)
    entries = {}
    for ix in itertools.product(*(range(len(p)) for p in parts)):
        e = parts[0].elements[ix[0]]
        for t in range(1, len(parts)):
            e = product(e, parts[t].elements[ix[t]])
        entries[ix] = e
    return RefinementTensor(tuple(parts), entries)


def product_masses(parts: Sequence[Partition], m: StateM):
    """Masses of the product refinement without materialising its elements."""
    parts = list(parts)
    space = _same_space(parts)
    if m.space != space:
        raise SpaceMismatchError("partitions and state live on different spaces")
    num = space.numeric
    shape = tuple(len(p) for p in parts)
    masses = dict.fromkeys(itertools.product(*(range(k) for k in shape)), num.zero())
    for w, pw in enumerate(space.weights):
        if pw == 0:
            continue
        cols = [[(i, el.values[w]) for i, el in enumerate(p) if el.values[w] != 0]
                for p in parts]
        for combo in itertools.product(*cols):
            v = pw
            for _, x in combo:
                v = v * x
            masses[tuple(i for i, _ in combo)] += v
    return masses


def tau_partition(tau: TransformationTau, A: Partition) -> Partition:
    if A.space != tau.space:
        raise SpaceMismatchError("transformation and partition live on different spaces")
    return Partition(tuple(tau_apply(tau, a) for a in A))


def is_idempotent(A: Partition) -> bool:
    """True iff every element is crisp (``a ⊕ a = a``)."""
    return all(a.is_crisp() for a in A)


def h_parallel(B: Partition, A: Partition, m: StateM, base=NATURAL) -> EntropyValue:
    """``H(B || A) = sum_ij m(b_j) phi(m(a_i . b_j) / m(b_j))``."""
    _check_base(base)
    space = _same_space([A, B])
    if m.space != space:
        raise SpaceMismatchError("partitions and state live on different spaces")
    cond = [state_eval(m, b) for b in B]
    pairs = {
        (i, j): state_eval(m, product(a, b))
        for i, a in enumerate(A)
        for j, b in enumerate(B)
    }
    return EntropyValue(_conditional(pairs, cond, base), base)
