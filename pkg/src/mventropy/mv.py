"""Finite tribes of fuzzy sets: the concrete MV-algebra carrier.

Elements are functions from a finite probability space into [0, 1].  The
standard MV-algebra [0, 1] is the one-point space; Boolean algebras are the
{0, 1}-valued elements.  Transformations are point maps acting by
precomposition, f -> f o T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from .errors import (
    DomainError,
    PreconditionError,
    SpaceMismatchError,
    UndefinedSumError,
)

EXACT = "exact"
FLOAT = "float"


def parse_fraction(text) -> Fraction:
    """Parse ``"p/q"``, a decimal string, an int or a Fraction exactly.

    Floats go through their shortest repr, so ``0.4`` becomes ``2/5``.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise DomainError(f"not a number: {text!r}")
    if isinstance(text, (int, Rational)):
        return Fraction(text)
    if isinstance(text, float):
        if not math.isfinite(text):
            raise DomainError(f"not a finite number: {text!r}")
        return Fraction(repr(text))
    s = str(text).strip()
    if "/" in s:
        p, q = s.split("/", 1)
        p, q = p.strip(), q.strip()
        if not (p.lstrip("+-").isdigit() and q.isdigit()):
            raise DomainError(f"malformed fraction {text!r}")
        if int(q) == 0:
            raise DomainError(f"zero denominator in {text!r}")
        return Fraction(int(p), int(q))
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a number: {text!r}") from exc


@dataclass(frozen=True)
class NumericMode:
    """Arithmetic used for element values.

    ``exact`` keeps every value a :class:`Fraction`; ``float`` uses float64
    and compares with ``tolerance``.
    """

    kind: str = EXACT
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.kind not in (EXACT, FLOAT):
            raise ValueError(f"unknown numeric mode {self.kind!r}")
        if self.kind == FLOAT and not self.tolerance > 0:
            raise ValueError("float mode needs a positive tolerance")

    @property
    def exact(self) -> bool:
        return self.kind == EXACT

    @property
    def tol(self):
        return 0 if self.exact else self.tolerance

    def coerce(self, x):
        if self.exact:
            return parse_fraction(x)
        if isinstance(x, str):
            return float(parse_fraction(x))
        return float(x)

    def eq(self, x, y) -> bool:
        if self.exact:
            return x == y
        return abs(x - y) <= self.tolerance

    def le(self, x, y) -> bool:
        return x <= y + self.tol

    def zero(self):
        return Fraction(0) if self.exact else 0.0

    def one(self):
        return Fraction(1) if self.exact else 1.0


EXACT_MODE = NumericMode(EXACT)


@dataclass(frozen=True)
class FiniteSpace:
    """Finite probability space hosting a tribe.

    Identity is structural: two spaces with the same labels, weights and
    numeric mode are the same space.
    """

    point_ids: tuple
    weights: tuple
    numeric: NumericMode = EXACT_MODE

    def __post_init__(self):
        ids = tuple(self.point_ids)
        if len(set(ids)) != len(ids):
            raise DomainError("point ids must be distinct")
        if not ids:
            raise DomainError("a space needs at least one point")
        if len(self.weights) != len(ids):
            raise DomainError(
                f"{len(ids)} points but {len(self.weights)} weights"
            )
        weights = tuple(self.numeric.coerce(w) for w in self.weights)
        for i, w in enumerate(weights):
            if w < 0:
                raise DomainError(f"negative weight at point {i}: {w}")
        total = sum(weights, self.numeric.zero())
        if not self.numeric.eq(total, 1):
            raise DomainError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "point_ids", ids)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, n: int, numeric: NumericMode = EXACT_MODE, ids=None):
        w = Fraction(1, n) if numeric.exact else 1.0 / n
        return cls(tuple(ids) if ids is not None else tuple(range(n)), (w,) * n, numeric)

    @classmethod
    def single_point(cls, numeric: NumericMode = EXACT_MODE):
        """The standard MV-algebra [0, 1]."""
        return cls((0,), (1,), numeric)

    def __len__(self):
        return len(self.point_ids)

    @property
    def numeric_mode(self) -> NumericMode:
        return self.numeric

    def element(self, values) -> "MvElement":
        return MvElement(self, values)

    def constant(self, c) -> "MvElement":
        return MvElement(self, (c,) * len(self))

    def unit(self) -> "MvElement":
        return self.constant(1)

    def zero(self) -> "MvElement":
        return self.constant(0)

    def indicator(self, points: Iterable[int]) -> "MvElement":
        pts = set(points)
        return MvElement(self, tuple(1 if i in pts else 0 for i in range(len(self))))


@dataclass(frozen=True)
class MvElement:
    """A fuzzy set ``f: points -> [0, 1]`` of a :class:`FiniteSpace`."""

    space: FiniteSpace
    values: tuple = field()

    def __post_init__(self):
        vals = self.values
        if isinstance(vals, MvElement):
            vals = vals.values
        vals = tuple(self.space.numeric.coerce(v) for v in vals)
        if len(vals) != len(self.space):
            raise DomainError(
                f"element has {len(vals)} values, space has {len(self.space)} points"
            )
        tol = self.space.numeric.tol
        clean = []
        for i, v in enumerate(vals):
            if v < -tol or v > 1 + tol:
                raise DomainError(f"value {v} at point {i} is outside [0, 1]")
            if not self.space.numeric.exact:
                v = min(1.0, max(0.0, v))
            clean.append(v)
        object.__setattr__(self, "values", tuple(clean))

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def is_crisp(self) -> bool:
        num = self.space.numeric
        return all(num.eq(v, 0) or num.eq(v, 1) for v in self.values)

    def equals(self, other: "MvElement") -> bool:
        _same_space(self, other)
        num = self.space.numeric
        return all(num.eq(x, y) for x, y in zip(self.values, other.values))


def _same_space(*elements: MvElement) -> FiniteSpace:
    space = elements[0].space
    for e in elements[1:]:
        if e.space != space:
            raise SpaceMismatchError("elements belong to different spaces")
    return space


def _raw(space: FiniteSpace, values) -> MvElement:
    # values already coerced and inside [0, 1]; skip revalidation cost
    e = object.__new__(MvElement)
    object.__setattr__(e, "space", space)
    object.__setattr__(e, "values", tuple(values))
    return e


def mv_neg(a: MvElement) -> MvElement:
    return _raw(a.space, (1 - x for x in a.values))


def mv_oplus(a: MvElement, b: MvElement) -> MvElement:
    """Truncated sum ``min(1, a + b)``."""
    space = _same_space(a, b)
    one = space.numeric.one()
    return _raw(space, (min(one, x + y) for x, y in zip(a.values, b.values)))


def mv_odot(a: MvElement, b: MvElement) -> MvElement:
    """Łukasiewicz product ``max(0, a + b - 1)``."""
    space = _same_space(a, b)
    zero = space.numeric.zero()
    return _raw(space, (max(zero, x + y - 1) for x, y in zip(a.values, b.values)))


def mv_meet(a: MvElement, b: MvElement) -> MvElement:
    space = _same_space(a, b)
    return _raw(space, (min(x, y) for x, y in zip(a.values, b.values)))


def product(a: MvElement, b: MvElement) -> MvElement:
    """The natural (pointwise) product of the tribe."""
    space = _same_space(a, b)
    return _raw(space, (x * y for x, y in zip(a.values, b.values)))


def partial_add(a: MvElement, b: MvElement) -> MvElement:
    """Group addition inside the unit interval.

    Defined only when ``a + b <= u`` at every point; otherwise raises
    :class:`UndefinedSumError` naming the first offending point.
    """
    space = _same_space(a, b)
    num = space.numeric
    out = []
    for i, (x, y) in enumerate(zip(a.values, b.values)):
        s = x + y
        if not num.le(s, 1):
            raise UndefinedSumError(i, s)
        out.append(s if num.exact else min(1.0, s))
    return _raw(space, out)


def riesz_decompose(a: MvElement, b: MvElement, c: MvElement):
    """Split ``a <= b + c`` as ``a = d + e`` with ``d <= b`` and ``e <= c``.

    ``d = a ∧ b`` and ``e = a - d``.
    """
    space = _same_space(a, b, c)
    num = space.numeric
    for i, (x, y, z) in enumerate(zip(a.values, b.values, c.values)):
        if not num.le(x, y + z):
            raise PreconditionError(f"a > b + c at point {i}")
    d = mv_meet(a, b)
    zero = num.zero()
    e = _raw(space, (max(zero, x - y) for x, y in zip(a.values, d.values)))
    return d, e


@dataclass(frozen=True)
class StateM:
    """The state ``m(f) = sum_w f(w) P(w)``."""

    space: FiniteSpace

    def __call__(self, a: MvElement):
        return state_eval(self, a)


def state_eval(m: StateM, a: MvElement):
    if a.space != m.space:
        raise SpaceMismatchError("state and element live on different spaces")
    num = m.space.numeric
    if num.exact:
        return sum((x * w for x, w in zip(a.values, m.space.weights)), Fraction(0))
    return math.fsum(x * w for x, w in zip(a.values, m.space.weights))


@dataclass(frozen=True)
class TransformationTau:
    """Measure-preserving point map ``T``; acts on elements by ``f -> f o T``."""

    space: FiniteSpace
    point_map: tuple

    def __post_init__(self):
        pm = tuple(int(j) for j in self.point_map)
        n = len(self.space)
        if len(pm) != n:
            raise DomainError(f"map has {len(pm)} entries, space has {n} points")
        for i, j in enumerate(pm):
            if not 0 <= j < n:
                raise DomainError(f"map sends point {i} to {j}, out of range")
        num = self.space.numeric
        pushed = [num.zero()] * n
        for i, j in enumerate(pm):
            pushed[j] += self.space.weights[i]
        for j in range(n):
            if not num.eq(pushed[j], self.space.weights[j]):
                raise DomainError(
                    f"map is not measure-preserving at point {j}: "
                    f"pushforward {pushed[j]} != weight {self.space.weights[j]}"
                )
        object.__setattr__(self, "point_map", pm)

    @classmethod
    def identity(cls, space: FiniteSpace):
        return cls(space, tuple(range(len(space))))

    def __call__(self, a: MvElement) -> MvElement:
        return tau_apply(self, a)

    def power(self, k: int) -> "TransformationTau":
        """``tau^k``, i.e. precomposition with ``T^k``."""
        pm = list(range(len(self.space)))
        for _ in range(k):
            pm = [self.point_map[j] for j in pm]
        return TransformationTau(self.space, tuple(pm))


def tau_apply(tau: TransformationTau, a: MvElement) -> MvElement:
    if a.space != tau.space:
        raise SpaceMismatchError("transformation and element live on different spaces")
    return _raw(a.space, (a.values[j] for j in tau.point_map))


@dataclass(frozen=True)
class DynamicalSystem:
    """A space with its state and a measure-preserving transformation.

    Additivity of the state and of tau, and ``tau(u) = u``, hold by
    construction; ``m(u) = 1`` and invariance of ``m`` are checked here.
    """

    space: FiniteSpace
    tau: TransformationTau
    state: StateM = None

    def __post_init__(self):
        if self.state is None:
            object.__setattr__(self, "state", StateM(self.space))
        if self.tau.space != self.space or self.state.space != self.space:
            raise SpaceMismatchError("system components live on different spaces")
        u = self.space.unit()
        if not self.space.numeric.eq(state_eval(self.state, u), 1):
            raise DomainError("m(u) != 1")
        if not tau_apply(self.tau, u).equals(u):
            raise DomainError("tau(u) != u")

    @classmethod
    def from_map(cls, space: FiniteSpace, point_map: Sequence[int]):
        return cls(space, TransformationTau(space, tuple(point_map)))

    @property
    def m(self) -> StateM:
        return self.state
