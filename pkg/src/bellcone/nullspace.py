"""Null directions of the local cone and canonical forms modulo them.

A null vector puts -1 on a full line of one sector (all outcomes of one
observer's setting, every other observer frozen at one (setting, outcome)
pair) and +1 on the continuation of that line in another sector of the
varying observer.  Every deterministic pattern meets the two lines either
both once or not at all, so these vectors score zero against every
deterministic vector; physically they encode that one observer's outcome
marginals cannot depend on the distant setting choices.

Two inequality vectors differing by a combination of null vectors are
equivalent.  ``canonicalize`` picks the unique class representative:
orthogonal projection onto the complement of the null span (exact
rationals), rescaled to a primitive integer vector with positive leading
entry.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .detvectors import DEFAULT_GUARD, det_ones
from .intlinalg import dot, independent_rows, invert_matrix, primitive_integer
from .scenario import Scenario, ScenarioError


@dataclass(frozen=True)
class NullVector:
    """One elementary null direction."""

    components: tuple[int, ...]
    observer: int
    minus_setting: int
    plus_setting: int
    # (setting, outcome) frozen for each other observer, in observer order.
    context: tuple[tuple[int, int], ...]
    source_sector: tuple[int, ...]
    target_sector: tuple[int, ...]


def _line_cells(
    s: Scenario, observer: int, setting: int, context: Sequence[tuple[int, int]]
) -> list[int]:
    cells = []
    for outcome in range(s.observers[observer].outcomes[setting]):
        pairs = []
        ctx_iter = iter(context)
        for o in range(s.n_observers):
            if o == observer:
                pairs.append((setting, outcome))
            else:
                pairs.append(next(ctx_iter))
        cells.append(s.k_index(tuple(pairs)))
    return cells


def enumerate_null_vectors(s: Scenario) -> list[NullVector]:
    """All elementary null vectors, in a deterministic order.

    Every choice of varying observer, ordered pair of its settings, and
    frozen (setting, outcome) pair per other observer yields one vector.
    An observer with a single setting is never varied: there is no second
    sector for the line to continue into.
    """
    out: list[NullVector] = []
    for observer in range(s.n_observers):
        obs = s.observers[observer]
        if obs.n_settings < 2:
            continue
        other_indices = [o for o in range(s.n_observers) if o != observer]
        context_choices = itertools.product(
            *(
                [
                    (setting, outcome)
                    for setting in range(s.observers[o].n_settings)
                    for outcome in range(s.observers[o].outcomes[setting])
                ]
                for o in other_indices
            )
        )
        for context in context_choices:
            for minus_setting, plus_setting in itertools.permutations(
                range(obs.n_settings), 2
            ):
                comp = [0] * s.n_k
                for k in _line_cells(s, observer, minus_setting, context):
                    comp[k] = -1
                for k in _line_cells(s, observer, plus_setting, context):
                    comp[k] = 1
                ctx_settings = iter(pair[0] for pair in context)
                source = tuple(
                    minus_setting if o == observer else next(ctx_settings)
                    for o in range(s.n_observers)
                )
                ctx_settings = iter(pair[0] for pair in context)
                target = tuple(
                    plus_setting if o == observer else next(ctx_settings)
                    for o in range(s.n_observers)
                )
                out.append(
                    NullVector(
                        components=tuple(comp),
                        observer=observer,
                        minus_setting=minus_setting,
                        plus_setting=plus_setting,
                        context=tuple(context),
                        source_sector=source,
                        target_sector=target,
                    )
                )
    if s.n_lambda <= DEFAULT_GUARD:
        _verify_null(s, out)
    return out


def _verify_null(s: Scenario, vectors: list[NullVector]) -> None:
    for assignment in s.enumerate_assignments():
        ones = det_ones(s, assignment)
        for z in vectors:
            if sum(z.components[k] for k in ones) != 0:
                raise AssertionError("null vector scores nonzero on a pattern")


@lru_cache(maxsize=64)
def _null_context(s: Scenario):
    """Cached (basis rows, inverse Gram) for the projection onto the null span."""
    vectors = enumerate_null_vectors(s)
    rows = [z.components for z in vectors]
    picked = independent_rows(rows)
    basis = [rows[i] for i in picked]
    gram = [[dot(a, b) for b in basis] for a in basis]
    inv = invert_matrix(gram)
    if inv is None and basis:
        raise AssertionError("null basis Gram matrix is singular")
    return basis, inv


def null_basis(s: Scenario) -> list[tuple[int, ...]]:
    """A linearly independent generating set of null vectors."""
    basis, _ = _null_context(s)
    return list(basis)


def null_rank(s: Scenario) -> int:
    return len(null_basis(s))


def split_off_null(
    s: Scenario, vec: Sequence[int | Fraction]
) -> tuple[list[Fraction], list[Fraction]]:
    """Orthogonal split of ``vec`` against the null span (exact).

    Returns (span part, null part): the span part lies in the space
    spanned by the deterministic vectors, the null part is the signaling
    content; they sum to ``vec``.
    """
    if len(vec) != s.n_k:
        raise ScenarioError(f"vector length {len(vec)} != n_k {s.n_k}")
    values = [Fraction(v) for v in vec]
    basis, inv = _null_context(s)
    null_part = [Fraction(0)] * len(values)
    if basis:
        rhs = [dot(row, values) for row in basis]
        coeff = [dot(inv_row, rhs) for inv_row in inv]
        for c, row in zip(coeff, basis):
            if c:
                null_part = [n + c * r for n, r in zip(null_part, row)]
    span_part = [v - n for v, n in zip(values, null_part)]
    return span_part, null_part


def canonicalize(s: Scenario, vec: Sequence[int | Fraction]) -> tuple[int, ...]:
    """Unique representative of ``vec``'s class modulo the null span.

    Projects onto the orthogonal complement of the null span with exact
    rational arithmetic, then rescales to a primitive integer vector with
    positive leading nonzero entry.  Two vectors are equivalent iff their
    canonical forms are equal; null vectors canonicalize to zero.
    """
    span_part, _ = split_off_null(s, vec)
    return primitive_integer(span_part, orient="leading")


def no_signaling_defect(
    s: Scenario, p: Sequence[Fraction | int]
) -> list[tuple[NullVector, Fraction]]:
    """Residual of ``p`` against every elementary null vector.

    A physical (no-signaling) probability vector has every residual zero;
    each nonzero residual names the observer, line, and sector pair whose
    marginals disagree.
    """
    if len(p) != s.n_k:
        raise ScenarioError(f"probability vector length {len(p)} != n_k {s.n_k}")
    values = [Fraction(v) for v in p]
    return [
        (z, Fraction(dot(z.components, values)))
        for z in enumerate_null_vectors(s)
    ]


def marginals(
    s: Scenario, p: Sequence[Fraction | int]
) -> dict[tuple[int, int, int], dict[tuple[int, ...], Fraction]]:
    """Single-observer marginals per context of distant setting choices.

    Key: (observer, setting, outcome).  Value: for every joint setting
    choice of the other observers, the summed coincidence probability.
    No-signaling means each inner dict holds a single value.
    """
    if len(p) != s.n_k:
        raise ScenarioError(f"probability vector length {len(p)} != n_k {s.n_k}")
    values = [Fraction(v) for v in p]
    out: dict[tuple[int, int, int], dict[tuple[int, ...], Fraction]] = {}
    for observer in range(s.n_observers):
        obs = s.observers[observer]
        others = [o for o in range(s.n_observers) if o != observer]
        other_settings = itertools.product(
            *(range(s.observers[o].n_settings) for o in others)
        )
        for ctx in other_settings:
            for setting in range(obs.n_settings):
                sector = []
                ctx_iter = iter(ctx)
                for o in range(s.n_observers):
                    sector.append(setting if o == observer else next(ctx_iter))
                for outcome in range(obs.outcomes[setting]):
                    total = Fraction(0)
                    ranges = []
                    for o in range(s.n_observers):
                        if o == observer:
                            ranges.append([outcome])
                        else:
                            ranges.append(
                                range(s.observers[o].outcomes[sector[o]])
                            )
                    for combo in itertools.product(*ranges):
                        cell = s.k_index(
                            tuple(zip(sector, combo))
                        )
                        total += values[cell]
                    out.setdefault((observer, setting, outcome), {})[tuple(ctx)] = total
    return out
