"""Small dense complex linear algebra on nested lists."""

from __future__ import annotations

import math
from typing import Sequence

from .errors import SingularMatrixError

__all__ = ["solve", "norm2", "matvec", "PIVOT_RTOL"]

PIVOT_RTOL = 1e-14

ComplexVec = Sequence[complex]
ComplexMatrix = Sequence[Sequence[complex]]


def norm2(v: ComplexVec) -> float:
    """Euclidean norm, computed without intermediate overflow."""
    return math.hypot(*(abs(c) for c in v))


def matvec(a: ComplexMatrix, x: ComplexVec) -> list[complex]:
    return [sum((aij * xj for aij, xj in zip(row, x)), 0j) for row in a]


def solve(a: ComplexMatrix, b: ComplexVec) -> list[complex]:
    """Solve ``a @ y = b`` by Gaussian elimination with partial pivoting.

    A pivot whose modulus falls below ``PIVOT_RTOL`` times the largest entry
    modulus of its (original) row raises SingularMatrixError.
    """
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    if len(b) != n:
        raise ValueError(f"right-hand side has length {len(b)}, expected {n}")
    m = [[complex(v) for v in row] for row in a]
    y = [complex(v) for v in b]
    scale = [max((abs(v) for v in row), default=0.0) for row in m]
    for row_scale, row in zip(scale, m):
        if not math.isfinite(row_scale):
            raise SingularMatrixError("matrix has non-finite entries")

    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(m[i][k]))
        piv = abs(m[p][k])
        if piv == 0.0 or piv < PIVOT_RTOL * scale[p]:
            raise SingularMatrixError(f"pivot {piv:.3e} in column {k} is numerically zero")
        if p != k:
            m[k], m[p] = m[p], m[k]
            y[k], y[p] = y[p], y[k]
            scale[k], scale[p] = scale[p], scale[k]
        pivot_row = m[k]
        inv = 1.0 / pivot_row[k]
        for i in range(k + 1, n):
            factor = m[i][k] * inv
            if factor == 0:
                continue
            row = m[i]
            for j in range(k + 1, n):
                row[j] -= factor * pivot_row[j]
            row[k] = 0j
            y[i] -= factor * y[k]

    x = [0j] * n
    for k in range(n - 1, -1, -1):
        acc = y[k]
        row = m[k]
        for j in range(k + 1, n):
            acc -= row[j] * x[j]
        x[k] = acc / row[k]
    return x
