"""Deterministic coincidence vectors and their structural identities.

Every deterministic assignment produces a 0/1 vector over coincidence
space: component 1 exactly where each observer's chosen outcome for the
cell's setting matches the cell.  Each vector has exactly one 1 per
sector, hence ``n_t`` ones in total.

All arithmetic in this module is exact integer arithmetic (plain ints or
int64 numpy with magnitudes far below overflow); determinant-style signs
elsewhere depend on it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .intlinalg import integer_rank
from .scenario import Assignment, Scenario, ScenarioError

# Refuse to materialize assignment-indexed matrices above this many rows
# unless the caller explicitly overrides.
DEFAULT_GUARD = 10_000


class SizeGuardError(ScenarioError):
    """Raised instead of silently allocating a huge dense object."""


def _check_guard(s: Scenario, guard: int | None) -> None:
    limit = DEFAULT_GUARD if guard is None else guard
    if s.n_lambda > limit:
        raise SizeGuardError(
            f"{s.n_lambda} assignments exceed the guard of {limit}; "
            "pass a larger guard explicitly to override"
        )


@dataclass(frozen=True)
class DetVector:
    """The 0/1 coincidence vector of one deterministic assignment."""

    assignment: Assignment
    ones: tuple[int, ...]  # the n_t flat coincidence indices set to 1
    n_k: int

    def dense(self) -> list[int]:
        out = [0] * self.n_k
        for k in self.ones:
            out[k] = 1
        return out


def det_ones(s: Scenario, assignment: Assignment) -> tuple[int, ...]:
    """Flat indices of the coincidences produced by an assignment."""
    per_observer = []
    for o, chosen in enumerate(assignment):
        base = s.pair_offsets[o]
        per_observer.append(
            [base[i] + x for i, x in enumerate(chosen)]
        )
    ones = []
    for pairs in itertools.product(*per_observer):
        flat = 0
        for o, p in enumerate(pairs):
            flat = flat * s.pair_counts[o] + p
        ones.append(flat)
    return tuple(sorted(ones))


def det_vector(s: Scenario, assignment: Assignment) -> DetVector:
    s.assignment_index(assignment)  # validates ranges
    return DetVector(assignment=assignment, ones=det_ones(s, assignment), n_k=s.n_k)


def b_matrix(s: Scenario, *, guard: int | None = None) -> np.ndarray:
    """Dense (n_lambda, n_k) 0/1 matrix, assignment rows in canonical order."""
    _check_guard(s, guard)
    mat = np.zeros((s.n_lambda, s.n_k), dtype=np.int64)
    for row, assignment in enumerate(s.enumerate_assignments()):
        mat[row, list(det_ones(s, assignment))] = 1
    return mat


@lru_cache(maxsize=64)
def _b_matrix_cached(s: Scenario, guard: int | None) -> np.ndarray:
    mat = b_matrix(s, guard=guard)
    mat.setflags(write=False)
    return mat


def b_matrix_cached(s: Scenario, *, guard: int | None = None) -> np.ndarray:
    """Read-only cached dense matrix (shared by the cone machinery)."""
    return _b_matrix_cached(s, guard)


@dataclass(frozen=True)
class GramMatrix:
    """All pairwise dot products of deterministic vectors."""

    entries: np.ndarray  # (n_lambda, n_lambda) int64, symmetric
    n_t: int


def agreement_matrix(s: Scenario, observer: int) -> np.ndarray:
    """Per-observer setting-agreement counts between partial assignments.

    Entry [a, b] counts the settings of this observer on which partial
    assignments a and b (enumerated lexicographically) choose the same
    outcome.  The full Gram matrix is the Kronecker product of these.
    """
    obs = s.observers[observer]
    choices = list(itertools.product(*(range(k) for k in obs.outcomes)))
    n = len(choices)
    mat = np.zeros((n, n), dtype=np.int64)
    for i, a in enumerate(choices):
        for j, b in enumerate(choices):
            mat[i, j] = sum(x == y for x, y in zip(a, b))
    return mat


def gram(s: Scenario, *, guard: int | None = None) -> GramMatrix:
    """Gram matrix, computed two independent ways that must agree.

    The direct path multiplies the dense 0/1 matrix with itself; the
    factorized path takes the Kronecker product of per-observer
    agreement counts.  Any disagreement is a bug, not a warning.
    """
    _check_guard(s, guard)
    mat = b_matrix_cached(s, guard=guard)
    direct = mat @ mat.T
    factorized = agreement_matrix(s, 0)
    for o in range(1, s.n_observers):
        factorized = np.kron(factorized, agreement_matrix(s, o))
    if not np.array_equal(direct, factorized):
        raise AssertionError("gram factorization mismatch")
    return GramMatrix(entries=direct, n_t=s.n_t)


def span_rank(s: Scenario, *, guard: int | None = None) -> int:
    """Exact integer rank of the span of all deterministic vectors."""
    _check_guard(s, guard)
    rows = [list(map(int, det_vector_row)) for det_vector_row in b_matrix_cached(s, guard=guard)]
    return integer_rank(rows)


@dataclass(frozen=True)
class InteriorVector:
    """Componentwise sum of all deterministic vectors.

    Every component is >= 1, so the vector sits strictly inside the cone;
    it orients every face test.
    """

    components: tuple[int, ...]
    n_lambda: int
    n_t: int


def interior_vector(s: Scenario, *, guard: int | None = None) -> InteriorVector:
    _check_guard(s, guard)
    total = b_matrix_cached(s, guard=guard).sum(axis=0)
    return InteriorVector(
        components=tuple(int(v) for v in total), n_lambda=s.n_lambda, n_t=s.n_t
    )
