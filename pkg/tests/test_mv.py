from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mventropy import (
    DomainError,
    DynamicalSystem,
    FiniteSpace,
    NumericMode,
    PreconditionError,
    SpaceMismatchError,
    StateM,
    TransformationTau,
    UndefinedSumError,
    mv_neg,
    mv_odot,
    mv_oplus,
    partial_add,
    riesz_decompose,
    state_eval,
    tau_apply,
)
from mventropy.mv import parse_fraction

SPACE3 = FiniteSpace((0, 1, 2), ("1/2", "1/4", "1/4"))
unit_vals = st.fractions(min_value=0, max_value=1, max_denominator=50)
elements3 = st.lists(unit_vals, min_size=3, max_size=3).map(SPACE3.element)


def test_parse_fraction():
    assert parse_fraction("3/7") == Fraction(3, 7)
    assert parse_fraction("0.1") == Fraction(1, 10)
    assert parse_fraction(0.4) == Fraction(2, 5)
    assert parse_fraction(2) == 2
    for bad in ("1/0", "a/b", "x", True):
        with pytest.raises(DomainError):
            parse_fraction(bad)


def test_neg_examples(unit_interval):
    assert mv_neg(unit_interval.unit()).values == (0,)
    assert mv_neg(unit_interval.element(["3/10"])).values == (Fraction(7, 10),)


def test_oplus_odot_examples(unit_interval):
    a, b = unit_interval.element([Fraction(1, 2)]), unit_interval.element([Fraction(7, 10)])
    assert mv_oplus(a, b).values == (1,)
    assert mv_odot(a, b).values == (Fraction(1, 5),)


def test_partial_add(unit_interval):
    s = partial_add(unit_interval.element(["2/5"]), unit_interval.element(["3/5"]))
    assert s.equals(unit_interval.unit())
    with pytest.raises(UndefinedSumError) as exc:
        partial_add(unit_interval.element(["1/2"]), unit_interval.element(["7/10"]))
    assert exc.value.point == 0


def test_partial_add_disjoint_indicators():
    space = FiniteSpace.uniform(4)
    s = partial_add(space.indicator([0]), space.indicator([2, 3]))
    assert s.equals(space.indicator([0, 2, 3]))
    with pytest.raises(UndefinedSumError) as exc:
        partial_add(space.indicator([0, 1]), space.indicator([1]))
    assert exc.value.point == 1


def test_riesz_examples(unit_interval):
    d, e = riesz_decompose(*(unit_interval.element([x]) for x in ("3/10", "1/5", "1/2")))
    assert (d.values, e.values) == ((Fraction(1, 5),), (Fraction(1, 10),))
    d, e = riesz_decompose(*(unit_interval.element([x]) for x in (0, "1/5", "1/2")))
    assert d.values == e.values == (0,)
    two = FiniteSpace.uniform(2)
    d, e = riesz_decompose(two.element(["0.6", "0.1"]), two.element(["0.5", "0.5"]),
                           two.element(["0.5", "0.5"]))
    assert d.values == (Fraction(1, 2), Fraction(1, 10))
    assert e.values == (Fraction(1, 10), 0)


def test_riesz_precondition(unit_interval):
    with pytest.raises(PreconditionError):
        riesz_decompose(*(unit_interval.element([x]) for x in ("0.9", "0.2", "0.5")))


@given(elements3, elements3, elements3)
def test_riesz_property(a, b, c):
    # scale a under b + c pointwise
    cap = [min(1, x + y) for x, y in zip(b.values, c.values)]
    a = SPACE3.element([x * k for x, k in zip(a.values, cap)])
    d, e = riesz_decompose(a, b, c)
    assert all(x <= y for x, y in zip(d.values, b.values))
    assert all(x <= y for x, y in zip(e.values, c.values))
    assert all(x + y == z for x, y, z in zip(d.values, e.values, a.values))


@given(elements3)
def test_mv_identities(a):
    u = SPACE3.unit()
    assert mv_neg(mv_neg(a)) == a
    assert mv_oplus(a, u).equals(u)
    assert mv_oplus(a, SPACE3.zero()).equals(a)
    assert mv_odot(a, mv_neg(a)).equals(SPACE3.zero())


@given(elements3, elements3)
def test_state_additive(a, b):
    m = StateM(SPACE3)
    b = SPACE3.element([min(y, 1 - x) for x, y in zip(a.values, b.values)])
    assert state_eval(m, partial_add(a, b)) == state_eval(m, a) + state_eval(m, b)


def test_state_examples():
    m = StateM(SPACE3)
    assert state_eval(m, SPACE3.unit()) == 1
    assert state_eval(m, SPACE3.zero()) == 0
    two = FiniteSpace.uniform(2)
    assert StateM(two)(two.element([1, 0])) == Fraction(1, 2)


def test_tau_examples():
    two = FiniteSpace.uniform(2)
    ident = TransformationTau.identity(two)
    a = two.element(["1/3", 1])
    assert tau_apply(ident, a) == a
    swap = TransformationTau(two, (1, 0))
    assert tau_apply(swap, two.element([1, 0])).values == (0, 1)


@given(elements3)
def test_tau_preserves_state(a):
    # swapping the two points of weight 1/4 preserves the measure
    tau = TransformationTau(SPACE3, (0, 2, 1))
    m = StateM(SPACE3)
    assert state_eval(m, tau_apply(tau, a)) == state_eval(m, a)


@given(elements3, elements3)
def test_tau_additive(a, b):
    tau = TransformationTau(SPACE3, (0, 2, 1))
    b = SPACE3.element([min(y, 1 - x) for x, y in zip(a.values, b.values)])
    assert tau_apply(tau, partial_add(a, b)) == partial_add(tau_apply(tau, a), tau_apply(tau, b))


def test_tau_rejects_non_measure_preserving():
    with pytest.raises(DomainError, match="measure-preserving"):
        TransformationTau(SPACE3, (1, 0, 2))
    with pytest.raises(DomainError):
        TransformationTau(SPACE3, (0, 1, 3))


def test_tau_float_tolerance():
    space = FiniteSpace((0, 1), (0.5, 0.5 + 1e-12), NumericMode("float", 1e-9))
    TransformationTau(space, (1, 0))
    space2 = FiniteSpace((0, 1), (0.4, 0.6), NumericMode("float", 1e-9))
    with pytest.raises(DomainError):
        TransformationTau(space2, (1, 0))


def test_non_invertible_measure_preserving_map():
    space = FiniteSpace((0, 1, 2), ("1/2", "1/2", 0))
    tau = TransformationTau(space, (1, 0, 0))
    assert tau.power(2).point_map == (0, 1, 1)


def test_space_validation():
    with pytest.raises(DomainError):
        FiniteSpace((0, 1), ("1/2", "1/3"))
    with pytest.raises(DomainError):
        FiniteSpace((0, 0), ("1/2", "1/2"))
    with pytest.raises(DomainError):
        FiniteSpace((0, 1), ("3/2", "-1/2"))


def test_element_validation_and_mismatch():
    with pytest.raises(DomainError):
        SPACE3.element([0, 1, "3/2"])
    with pytest.raises(DomainError):
        SPACE3.element([0, 1])
    other = FiniteSpace.uniform(3)
    with pytest.raises(SpaceMismatchError):
        mv_oplus(SPACE3.unit(), other.unit())
    with pytest.raises(SpaceMismatchError):
        state_eval(StateM(other), SPACE3.unit())


def test_structural_identity():
    assert FiniteSpace.uniform(2) == FiniteSpace((0, 1), ("1/2", "0.5"))
    assert FiniteSpace.uniform(2) != FiniteSpace.uniform(2, NumericMode("float"))


def test_dynamical_system_checks(cycle4):
    assert cycle4.state(cycle4.space.unit()) == 1
    with pytest.raises(SpaceMismatchError):
        DynamicalSystem(SPACE3, TransformationTau.identity(FiniteSpace.uniform(3)))
