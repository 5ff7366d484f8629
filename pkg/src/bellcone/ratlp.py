"""Exact rational linear programming: dense two-phase simplex, Bland's rule.

Built for the small, exactness-critical programs in this package
(membership of a probability vector in the local cone, certificate
refinement).  Every entry is a ``fractions.Fraction``; Bland's pivoting
rule guarantees termination, so verdicts are exact and deterministic.
No external solver is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction] | None = None
    objective: Fraction | None = None
    # When infeasible: y with y . column_j <= 0 for every column and y . b > 0.
    separating_dual: list[Fraction] | None = None


def solve_min(
    c: Sequence[Fraction | int],
    rows: Sequence[Sequence[Fraction | int]],
    b: Sequence[Fraction | int],
) -> LPResult:
    """Minimize ``c . x`` subject to ``rows @ x = b`` and ``x >= 0``."""
    m = len(rows)
    n = len(c)
    cost = [Fraction(v) for v in c]
    flip = [Fraction(bi) < 0 for bi in b]
    tab: list[list[Fraction]] = []
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ValueError("row length mismatch")
        sign = -1 if flip[i] else 1
        line = [sign * Fraction(v) for v in row]
        line += [Fraction(int(i == j)) for j in range(m)]  # artificial block
        line.append(sign * Fraction(b[i]))
        tab.append(line)
    basis = [n + i for i in range(m)]
    phase1_cost = [Fraction(0)] * n + [Fraction(1)] * m

    status = _simplex(tab, basis, phase1_cost, n + m)
    if status == "unbounded":  # cannot happen in phase 1 (objective >= 0)
        raise AssertionError("phase-1 objective unbounded")
    obj1 = sum(phase1_cost[basis[r]] * tab[r][-1] for r in range(len(tab)))
    if obj1 > 0:
        dual = []
        for i in range(m):
            yi = sum(
                phase1_cost[basis[r]] * tab[r][n + i] for r in range(len(tab))
            )
            dual.append(-yi if flip[i] else yi)
        return LPResult(status="infeasible", separating_dual=dual)

    _drive_out_artificials(tab, basis, n)

    status = _simplex(tab, basis, cost + [Fraction(0)] * m, n, restrict=n)
    if status == "unbounded":
        return LPResult(status="unbounded")
    x = [Fraction(0)] * n
    for r, bv in enumerate(basis):
        if bv < n:
            x[bv] = tab[r][-1]
    objective = sum(ci * xi for ci, xi in zip(cost, x))
    return LPResult(status="optimal", x=x, objective=objective)


def feasible_point(
    rows: Sequence[Sequence[Fraction | int]], b: Sequence[Fraction | int]
) -> LPResult:
    """Find any x >= 0 with ``rows @ x = b`` or a separating dual."""
    n = len(rows[0]) if rows else 0
    return solve_min([Fraction(0)] * n, rows, b)


def _simplex(
    tab: list[list[Fraction]],
    basis: list[int],
    cost: list[Fraction],
    n_cols: int,
    restrict: int | None = None,
) -> str:
    """Bland-rule simplex on the tableau in place; returns final status.

    ``n_cols`` is the number of structural columns considered for entry;
    ``restrict`` additionally caps the entering index (used in phase 2 to
    lock artificials out while they may still sit, at zero, in the basis).
    """
    limit = n_cols if restrict is None else restrict
    m = len(tab)
    while True:
        # Reduced costs from the current basis.
        entering = -1
        for j in range(limit):
            rc = cost[j]
            for r in range(m):
                cb = cost[basis[r]]
                if cb:
                    rc -= cb * tab[r][j]
            if rc < 0:
                entering = j
                break  # Bland: first (smallest-index) improving column
        if entering < 0:
            return "optimal"
        leaving = -1
        best: Fraction | None = None
        for r in range(m):
            coef = tab[r][entering]
            if coef > 0:
                ratio = tab[r][-1] / coef
                if best is None or ratio < best or (
                    ratio == best and basis[r] < basis[leaving]
                ):
                    best = ratio
                    leaving = r
        if leaving < 0:
            return "unbounded"
        _pivot(tab, basis, leaving, entering)


def _pivot(tab: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    pivot = tab[row][col]
    tab[row] = [v / pivot for v in tab[row]]
    for r in range(len(tab)):
        if r != row and tab[r][col]:
            f = tab[r][col]
            tab[r] = [v - f * w for v, w in zip(tab[r], tab[row])]
    basis[row] = col


def _drive_out_artificials(
    tab: list[list[Fraction]], basis: list[int], n: int
) -> None:
    """Pivot zero-valued artificials out of the basis; drop redundant rows."""
    r = 0
    while r < len(tab):
        if basis[r] >= n:
            col = next((j for j in range(n) if tab[r][j] != 0), None)
            if col is None:
                # The original row was linearly dependent; discard it.
                del tab[r]
                del basis[r]
                continue
            _pivot(tab, basis, r, col)
        r += 1
