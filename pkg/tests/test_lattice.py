import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torusecho import TrigPotential
from torusecho.lattice import (
    PrimitiveDirection,
    enumerate_primitive,
    h_lambda,
    h_lambda_perp,
    project_I_lambda,
    rational_direction,
)

small = st.integers(-40, 40)


def test_canonical_form_and_text():
    d = PrimitiveDirection.of(-2, -4 + 2)
    assert (d.p, d.q) == (1, 1)
    assert str(PrimitiveDirection.of(0, -3)) == "0/1"
    assert PrimitiveDirection.parse("3/-2") == PrimitiveDirection(3, -2)
    with pytest.raises(ValueError):
        PrimitiveDirection(2, 4)
    with pytest.raises(ValueError):
        PrimitiveDirection(-1, 2)


def test_enumerate_small_radius():
    dirs = enumerate_primitive(math.sqrt(2))
    assert [str(d) for d in dirs] == ["0/1", "1/0", "1/-1", "1/1"]
    assert enumerate_primitive(0.5) == []


def test_enumeration_matches_brute_force():
    r = 7.3
    got = {(d.p, d.q) for d in enumerate_primitive(r)}
    want = set()
    for p in range(-8, 9):
        for q in range(-8, 9):
            if (p, q) != (0, 0) and math.gcd(p, q) == 1 and p * p + q * q <= r * r:
                want.add((PrimitiveDirection.of(p, q).p, PrimitiveDirection.of(p, q).q))
    assert got == want


@given(small, small)
def test_of_is_idempotent_and_parallel(p, q):
    if (p, q) == (0, 0):
        return
    d = PrimitiveDirection.of(p, q)
    assert PrimitiveDirection.of(d.p, d.q) == d
    assert d.p * q - d.q * p == 0
    assert PrimitiveDirection.parse(str(d)) == d


@given(small, small, st.floats(-5, 5), st.floats(-5, 5))
def test_hamiltonians_split_the_norm(p, q, x, y):
    if (p, q) == (0, 0):
        return
    d = PrimitiveDirection.of(p, q)
    a, b = h_lambda(d, (x, y)), h_lambda_perp(d, (x, y))
    assert a * a + b * b == pytest.approx(x * x + y * y, rel=1e-12, abs=1e-12)


def test_contains_vectorized():
    d = PrimitiveDirection(1, 2)
    k = np.array([[2, 4], [1, 1], [0, 0], [-3, -6]])
    assert d.contains(k).tolist() == [True, False, True, True]


def test_project_matches_line_average():
    # I_Lambda b(x) = int_0^1 b(x + s v_perp) ds ; oracle: 4096-point periodic trapezoid
    rng = np.random.default_rng(3)
    V = TrigPotential.from_config([{"k": [2, 2], "re": 0.4}, {"k": [1, 1], "re": 0.2, "im": 0.1}])
    for a, b, r, i in zip(rng.integers(-3, 4, 6), rng.integers(-3, 4, 6), rng.normal(size=6), rng.normal(size=6)):
        if (a, b) != (0, 0):
            V = V + TrigPotential.from_config([{"k": [int(a), int(b)], "re": float(r), "im": float(i)}])
    d = PrimitiveDirection(1, 1)
    P = project_I_lambda(V, d)
    s = np.arange(4096) / 4096
    vp = np.array(d.perp)
    for x in rng.random((20, 2)):
        line = V(x[None, :] + s[:, None] * vp[None, :])
        assert P(x) == pytest.approx(np.mean(line), abs=1e-10)


def test_rational_direction():
    assert rational_direction((0.0, 0.5)) == PrimitiveDirection(0, 1)
    assert rational_direction((3.0, -1.5)) == PrimitiveDirection(2, -1)
    assert rational_direction((1.0, (1 + math.sqrt(5)) / 2)) is None
