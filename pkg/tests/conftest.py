import random
from fractions import Fraction

import pytest

from mventropy import DynamicalSystem, FiniteSpace, Partition, TransformationTau


def random_weights(rng, n, den=12):
    raw = [rng.randint(1, den) for _ in range(n)]
    tot = sum(raw)
    return [Fraction(r, tot) for r in raw]


def random_cycle_system(rng, npts, numeric=None):
    """Random permutation system: points split into cycles, constant weight per cycle."""
    pts = list(range(npts))
    rng.shuffle(pts)
    cycles = []
    while pts:
        size = rng.randint(1, len(pts))
        cycles.append(pts[:size])
        pts = pts[size:]
    cw = random_weights(rng, len(cycles))
    weights = [None] * npts
    pmap = [None] * npts
    for c, w in zip(cycles, cw):
        for i, p in enumerate(c):
            weights[p] = w / len(c)
            pmap[p] = c[(i + 1) % len(c)]
    kwargs = {} if numeric is None else {"numeric": numeric}
    space = FiniteSpace(tuple(range(npts)), tuple(weights), **kwargs)
    return DynamicalSystem(space, TransformationTau(space, tuple(pmap)))


def random_partition(rng, space, k, max_support=None, crisp=False, den=9):
    max_support = k if max_support is None else min(k, max_support)
    cols = []
    for _ in range(len(space)):
        if crisp:
            col = [0] * k
            col[rng.randrange(k)] = 1
        else:
            supp = rng.sample(range(k), rng.randint(1, max_support))
            raw = [rng.randint(1, den) for _ in supp]
            col = [Fraction(0)] * k
            for i, r in zip(supp, raw):
                col[i] = Fraction(r, sum(raw))
        cols.append(col)
    return Partition.from_rows(space, [[cols[w][i] for w in range(len(space))] for i in range(k)])


def random_crisp_partition(rng, space, k):
    """Crisp partition whose blocks are all nonempty where possible."""
    return random_partition(rng, space, k, crisp=True)


@pytest.fixture
def rng():
    return random.Random(20241018)


@pytest.fixture
def unit_interval():
    return FiniteSpace.single_point()


@pytest.fixture
def cycle4():
    space = FiniteSpace.uniform(4)
    return DynamicalSystem.from_map(space, [1, 2, 3, 0])


# criterion number -> (title, "PASS"/"FAIL", detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, status, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{status}] {num:2d}. {title}: {detail}")
