"""Exact rational linear algebra for small 0-1 design matrices.

Kernel bases are computed over the rationals and rescaled to primitive
integer vectors, so downstream identities (design @ kernel.T == 0) hold in
exact integer arithmetic.  Pivoting is deterministic (first nonzero row per
column), which keeps generated bases reproducible across platforms.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np


def rref(matrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals.

    Returns the nonzero rows and the pivot column indices.
    """
    rows = [[Fraction(x) for x in row] for row in matrix]
    if not rows:
        return [], []
    n_rows, n_cols = len(rows), len(rows[0])
    pivot_cols: list[int] = []
    pr = 0
    for c in range(n_cols):
        pivot = next((r for r in range(pr, n_rows) if rows[r][c] != 0), None)
        if pivot is None:
            continue
        rows[pr], rows[pivot] = rows[pivot], rows[pr]
        inv = rows[pr][c]
        if inv != 1:
            rows[pr] = [x / inv for x in rows[pr]]
        for r in range(n_rows):
            if r != pr and rows[r][c] != 0:
                f = rows[r][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[pr])]
        pivot_cols.append(c)
        pr += 1
        if pr == n_rows:
            break
    return rows[:pr], pivot_cols


def rank(matrix) -> int:
    return len(rref(matrix)[1])


def in_rowspace(matrix, vector) -> bool:
    """Exact test whether ``vector`` lies in the rational row space."""
    rows, pivot_cols = rref(matrix)
    v = [Fraction(x) for x in vector]
    for row, c in zip(rows, pivot_cols):
        if v[c] != 0:
            f = v[c]
            v = [a - f * b for a, b in zip(v, row)]
    return all(x == 0 for x in v)


def _primitive(vector: list[Fraction]) -> list[int]:
    den = 1
    for x in vector:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in vector]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return [x // g for x in ints] if g > 1 else ints


def orient(vector: list[int]) -> list[int]:
    """Canonical sign: entry sum negative; if the sum is zero, first nonzero positive."""
    s = sum(vector)
    if s > 0:
        return [-x for x in vector]
    if s == 0:
        first = next((x for x in vector if x != 0), 0)
        if first < 0:
            return [-x for x in vector]
    return vector


def kernel_basis(matrix) -> tuple[np.ndarray, list[int]]:
    """Primitive integer kernel basis, one vector per free column.

    Each basis vector has entry 1 at its free column before orientation;
    vectors are returned in free-column order as rows of an int array,
    together with the list of free columns.
    """
    matrix = np.asarray(matrix)
    rows, pivot_cols = rref(matrix)
    n_cols = matrix.shape[1]
    free_cols = [c for c in range(n_cols) if c not in pivot_cols]
    basis = []
    for c in free_cols:
        v = [Fraction(0)] * n_cols
        v[c] = Fraction(1)
        for r, pc in enumerate(pivot_cols):
            v[pc] = -rows[r][c]
        basis.append(orient(_primitive(v)))
    if not basis:
        return np.zeros((0, n_cols), dtype=np.int64), []
    return np.array(basis, dtype=np.int64), free_cols
