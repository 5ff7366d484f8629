"""Local hidden-variable cones for multi-party measurement scenarios.

Build the cone of deterministic coincidence vectors for any number of
observers, settings, and outcomes; decide membership of probability
vectors exactly; generate and validate the inequalities bounding the
cone; and evaluate quantum states against them, including the
partial-transposition test.
"""

from .facecore import BACKEND
from .farkas import ChPartitionSpec, FarkasVector, generate_ch, validate
from .polytope import (
    Inside,
    Outside,
    ProbVector,
    decide_membership,
    enumerate_facets,
    ingest_probabilities,
)
from .scenario import Scenario, ScenarioCounts, counts, make_scenario, parse_scenario

__all__ = [
    "BACKEND",
    "ChPartitionSpec",
    "FarkasVector",
    "Inside",
    "Outside",
    "ProbVector",
    "Scenario",
    "ScenarioCounts",
    "counts",
    "decide_membership",
    "enumerate_facets",
    "generate_ch",
    "ingest_probabilities",
    "make_scenario",
    "parse_scenario",
    "validate",
]
