"""Shared fixtures and independent oracles used across the suite."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from bellcone import scenario as sm
from bellcone.detvectors import b_matrix_cached, det_ones


@pytest.fixture
def chsh():
    """Two observers, two settings, two outcomes each."""
    return sm.make_scenario([2, 2], [2, 2])


def dense_det_vector(s, assignment):
    """Independent dense construction straight from the defining rule:
    entry 1 iff every observer's chosen outcome for the cell's setting
    matches the cell."""
    out = [0] * s.n_k
    for k in range(s.n_k):
        hit = True
        for o, (setting, outcome) in enumerate(s.coincidence_at(k)):
            if assignment[o][setting] != outcome:
                hit = False
                break
        if hit:
            out[k] = 1
    return out


def pr_box(s, anti_sector=(1, 1)):
    """Two-party box: perfect correlation in every sector except one,
    perfect anticorrelation there, uniform marginals."""
    p = [Fraction(0)] * s.n_k
    for sector in s.sectors():
        flip = 1 if sector == anti_sector else 0
        n_a = s.observers[0].outcomes[sector[0]]
        n_b = s.observers[1].outcomes[sector[1]]
        assert n_a == n_b == 2
        for x in range(2):
            for y in range(2):
                if (x ^ y) == flip:
                    p[s.k_index(((sector[0], x), (sector[1], y)))] = Fraction(1, 2)
    return p


def random_vertex_mixture(s, rng: random.Random, max_terms=6):
    mat = b_matrix_cached(s)
    idx = rng.sample(range(s.n_lambda), rng.randint(1, max_terms))
    weights = [Fraction(rng.randint(1, 9)) for _ in idx]
    total = sum(weights)
    weights = [w / total for w in weights]
    return [
        sum(w * int(mat[lam, k]) for w, lam in zip(weights, idx))
        for k in range(s.n_k)
    ]


def small_two_observer_grid(max_settings=3, max_outcomes=3):
    """Every two-observer scenario with uniform outcome counts in the grid."""
    out = []
    for s_a in range(1, max_settings + 1):
        for s_b in range(1, max_settings + 1):
            for k_a in range(1, max_outcomes + 1):
                for k_b in range(1, max_outcomes + 1):
                    out.append(sm.make_scenario([k_a] * s_a, [k_b] * s_b))
    return out


def brute_score(s, vec, assignment):
    """Pattern score computed directly from the cells an assignment hits."""
    return sum(vec[k] for k in det_ones(s, assignment))
