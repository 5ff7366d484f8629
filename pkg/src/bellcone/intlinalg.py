"""Exact integer and rational linear algebra for the cone machinery.

Everything here works on plain Python ints and ``fractions.Fraction``;
no floating point ever enters a verdict.  The elimination routines use
the fraction-free (single-step division) scheme, so intermediate values
stay integral and exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


def vector_gcd(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, abs(v))
    return g


def primitive_integer(
    vec: Sequence[Fraction | int], *, orient: str = "leading"
) -> tuple[int, ...]:
    """Smallest integer vector on the same ray (or line) as ``vec``.

    Denominators are cleared, the gcd divided out.  ``orient="leading"``
    flips the sign so the first nonzero entry is positive (a line
    representative); ``orient="keep"`` applies positive scaling only, so
    inequality directions survive.
    """
    fracs = [Fraction(v) for v in vec]
    if all(v == 0 for v in fracs):
        return tuple(0 for _ in fracs)
    denom = 1
    for v in fracs:
        denom = denom * v.denominator // gcd(denom, v.denominator)
    ints = [int(v * denom) for v in fracs]
    g = vector_gcd(ints)
    ints = [v // g for v in ints]
    if orient == "leading":
        lead = next(v for v in ints if v != 0)
        if lead < 0:
            ints = [-v for v in ints]
    elif orient != "keep":
        raise ValueError(f"unknown orientation {orient!r}")
    return tuple(ints)


def bareiss_determinant(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix."""
    n = len(rows)
    if n == 0:
        return 1
    m = [[int(v) for v in row] for row in rows]
    if any(len(row) != n for row in m):
        raise ValueError("matrix is not square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        pivot = m[k][k]
        row_k = m[k]
        for i in range(k + 1, n):
            row_i = m[i]
            factor = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (pivot * row_i[j] - factor * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def integer_rank(rows: Sequence[Sequence[int]]) -> int:
    """Exact rank of an integer matrix (fraction-free elimination)."""
    m = [[int(v) for v in row] for row in rows]
    if not m:
        return 0
    n_cols = len(m[0])
    rank = 0
    prev = 1
    for col in range(n_cols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pivot = m[rank][col]
        row_r = m[rank]
        for i in range(rank + 1, len(m)):
            row_i = m[i]
            factor = row_i[col]
            for j in range(col + 1, n_cols):
                row_i[j] = (pivot * row_i[j] - factor * row_r[j]) // prev
            row_i[col] = 0
        prev = pivot
        rank += 1
        if rank == len(m):
            break
    return rank


def independent_rows(rows: Sequence[Sequence[int]]) -> list[int]:
    """Indices of a greedy maximal linearly independent subset of rows."""
    basis: list[tuple[int, list[Fraction]]] = []  # (pivot column, unit-pivot row)
    picked: list[int] = []
    for idx, row in enumerate(rows):
        v = [Fraction(x) for x in row]
        for pcol, brow in basis:
            f = v[pcol]
            if f:
                v = [a - f * b for a, b in zip(v, brow)]
        pcol = next((j for j, a in enumerate(v) if a), None)
        if pcol is None:
            continue
        pivot = v[pcol]
        basis.append((pcol, [a / pivot for a in v]))
        picked.append(idx)
    return picked


def solve_linear(
    a: Sequence[Sequence[Fraction | int]], b: Sequence[Fraction | int]
) -> list[Fraction] | None:
    """Solve the square system ``a x = b`` exactly; None if singular."""
    n = len(a)
    m = [[Fraction(v) for v in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pivot = m[col][col]
        m[col] = [v / pivot for v in m[col]]
        for i in range(n):
            if i != col and m[i][col]:
                f = m[i][col]
                m[i] = [v - f * w for v, w in zip(m[i], m[col])]
    return [m[i][n] for i in range(n)]


def invert_matrix(a: Sequence[Sequence[Fraction | int]]) -> list[list[Fraction]] | None:
    """Exact inverse of a square matrix; None if singular."""
    n = len(a)
    m = [
        [Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
        for i, row in enumerate(a)
    ]
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pivot = m[col][col]
        m[col] = [v / pivot for v in m[col]]
        for i in range(n):
            if i != col and m[i][col]:
                f = m[i][col]
                m[i] = [v - f * w for v, w in zip(m[i], m[col])]
    return [row[n:] for row in m]


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))
