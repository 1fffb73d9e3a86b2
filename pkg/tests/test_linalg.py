import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracroot.errors import SingularMatrixError
from fracroot.linalg import matvec, norm2, solve


def test_solve_examples():
    assert solve([[1, 0], [0, 1]], [3, 4j]) == [3, 4j]
    assert solve([[2, 0], [0, 4]], [2, 4]) == [1, 1]
    with pytest.raises(SingularMatrixError):
        solve([[1, 1], [1, 1]], [1, 2])


def test_solve_needs_pivoting():
    assert solve([[0, 1], [1, 0]], [2, 3]) == [3, 2]
    y = solve([[1e-20, 1], [1, 1]], [1, 2])
    assert y[0] == pytest.approx(1) and y[1] == pytest.approx(1)


def test_near_singular_relative_to_row_scale():
    with pytest.raises(SingularMatrixError):
        solve([[1, 1], [1, 1 + 1e-16]], [1, 1])
    # tiny but well-scaled rows are fine
    y = solve([[1e-30, 0], [0, 1e-30]], [1e-30, 2e-30])
    assert y == [1, 2]


def test_non_finite_entries_are_singular():
    with pytest.raises(SingularMatrixError):
        solve([[float("nan"), 1], [1, 1]], [1, 1])
    with pytest.raises(SingularMatrixError):
        solve([[float("inf"), 1], [1, 1]], [1, 1])


def test_shape_checks():
    with pytest.raises(ValueError):
        solve([[1, 2]], [1])
    with pytest.raises(ValueError):
        solve([[1, 0], [0, 1]], [1])


def test_norm2_examples():
    assert norm2([3, 4]) == 5
    assert norm2([1j]) == 1
    assert norm2([0, 0, 0]) == 0
    assert norm2([1e200, 1e200]) == pytest.approx(1.4142135623730951e200)


def test_solve_matches_numpy():
    rng = np.random.default_rng(11)
    for n in (1, 2, 3, 5, 8):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        b = rng.normal(size=n) + 1j * rng.normal(size=n)
        ours = np.array(solve(a.tolist(), b.tolist()))
        assert np.allclose(ours, np.linalg.solve(a, b), rtol=1e-10, atol=1e-12)


def _unit_disk(rng):
    r, t = rng.random() ** 0.5, rng.uniform(0, 6.283185307179586)
    return complex(r * np.cos(t), r * np.sin(t))


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_solve_round_trip(n, seed):
    rng = random.Random(seed)
    a = [[_unit_disk(rng) + (2 if i == j else 0) for j in range(n)] for i in range(n)]
    b = [complex(rng.uniform(-5, 5), rng.uniform(-5, 5)) for _ in range(n)]
    y = solve(a, b)
    resid = [p - q for p, q in zip(matvec(a, y), b)]
    assert norm2(resid) <= 1e-9
