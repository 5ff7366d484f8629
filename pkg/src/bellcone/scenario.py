"""Measurement scenarios and the canonical flat index maps.

A scenario lists the observers, each observer's alternative measurement
settings, and how many distinct outcomes every setting has.  An undetected
event is modelled by the caller as one more ordinary outcome; nothing here
treats any outcome label specially.

Two flat enumerations derived from a scenario are used everywhere else:

* coincidence index: one (setting, outcome) pair per observer.  Flattened
  lexicographically: observers in declared order; within an observer,
  settings in declared order, outcomes in declared order.
* assignment index: one chosen outcome for every setting of every
  observer (a complete deterministic instruction set).  Flattened
  lexicographically in the same observer/setting order.

Scenarios are immutable after construction, so they are safe to share
across threads; all functions in this module are pure.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

# One (setting, outcome) pair per observer.
Coincidence = tuple[tuple[int, int], ...]
# Per observer, the chosen outcome of each of its settings.
Assignment = tuple[tuple[int, ...], ...]


class ScenarioError(ValueError):
    """Raised for malformed scenario definitions or scenario files."""


@dataclass(frozen=True)
class ObserverSpec:
    """One observer: a name and the outcome count of each setting."""

    name: str
    outcomes: tuple[int, ...]

    @property
    def n_settings(self) -> int:
        return len(self.outcomes)

    @property
    def total_outcomes(self) -> int:
        return sum(self.outcomes)


@dataclass(frozen=True)
class Scenario:
    """An ordered collection of observers."""

    observers: tuple[ObserverSpec, ...]

    def __post_init__(self) -> None:
        if len(self.observers) < 2:
            raise ScenarioError("a scenario needs at least 2 observers")
        for obs in self.observers:
            if obs.n_settings < 1:
                raise ScenarioError(f"observer {obs.name!r} has no settings")
            for i, k in enumerate(obs.outcomes):
                if k < 1:
                    raise ScenarioError(
                        f"observer {obs.name!r} setting {i} has {k} outcomes"
                    )

    # -- derived structure -------------------------------------------------

    @property
    def n_observers(self) -> int:
        return len(self.observers)

    @cached_property
    def setting_counts(self) -> tuple[int, ...]:
        return tuple(o.n_settings for o in self.observers)

    @cached_property
    def pair_counts(self) -> tuple[int, ...]:
        """Per observer, the number of (setting, outcome) pairs."""
        return tuple(o.total_outcomes for o in self.observers)

    @cached_property
    def pair_offsets(self) -> tuple[tuple[int, ...], ...]:
        """Per observer, the flat offset of (setting, 0) in its pair list."""
        out = []
        for obs in self.observers:
            offs, acc = [], 0
            for k in obs.outcomes:
                offs.append(acc)
                acc += k
            out.append(tuple(offs))
        return tuple(out)

    @cached_property
    def n_k(self) -> int:
        return math.prod(self.pair_counts)

    @cached_property
    def n_lambda(self) -> int:
        return math.prod(k for o in self.observers for k in o.outcomes)

    @cached_property
    def n_t(self) -> int:
        return math.prod(self.setting_counts)

    # -- coincidence index map ---------------------------------------------

    def pair_index(self, observer: int, setting: int, outcome: int) -> int:
        obs = self.observers[observer]
        if not 0 <= setting < obs.n_settings:
            raise ScenarioError(f"setting {setting} out of range for {obs.name!r}")
        if not 0 <= outcome < obs.outcomes[setting]:
            raise ScenarioError(
                f"outcome {outcome} out of range for {obs.name!r} setting {setting}"
            )
        return self.pair_offsets[observer][setting] + outcome

    def pair_at(self, observer: int, flat: int) -> tuple[int, int]:
        offs = self.pair_offsets[observer]
        if not 0 <= flat < self.pair_counts[observer]:
            raise ScenarioError(f"pair index {flat} out of range")
        setting = max(i for i, off in enumerate(offs) if off <= flat)
        return setting, flat - offs[setting]

    def k_index(self, coincidence: Coincidence) -> int:
        """Flat index of a coincidence; inverse of :meth:`coincidence_at`."""
        if len(coincidence) != self.n_observers:
            raise ScenarioError("coincidence must name every observer")
        flat = 0
        for o, (setting, outcome) in enumerate(coincidence):
            flat = flat * self.pair_counts[o] + self.pair_index(o, setting, outcome)
        return flat

    def coincidence_at(self, k: int) -> Coincidence:
        if not 0 <= k < self.n_k:
            raise ScenarioError(f"coincidence index {k} out of range")
        parts: list[tuple[int, int]] = []
        for o in range(self.n_observers - 1, -1, -1):
            k, rem = divmod(k, self.pair_counts[o])
            parts.append(self.pair_at(o, rem))
        return tuple(reversed(parts))

    def k_sector(self, k: int) -> tuple[int, ...]:
        """The joint setting choice (sector) a coincidence cell belongs to."""
        return tuple(setting for setting, _ in self.coincidence_at(k))

    def sectors(self) -> Iterator[tuple[int, ...]]:
        """All joint setting choices, lexicographically."""
        return itertools.product(*(range(n) for n in self.setting_counts))

    def sector_cells(self, sector: tuple[int, ...]) -> Iterator[int]:
        """Flat indices of the coincidence cells inside one sector."""
        ranges = [
            range(obs.outcomes[sector[o]]) for o, obs in enumerate(self.observers)
        ]
        for outcomes in itertools.product(*ranges):
            yield self.k_index(tuple(zip(sector, outcomes)))

    # -- assignment index map ----------------------------------------------

    def assignment_index(self, assignment: Assignment) -> int:
        if len(assignment) != self.n_observers:
            raise ScenarioError("assignment must cover every observer")
        flat = 0
        for o, obs in enumerate(self.observers):
            if len(assignment[o]) != obs.n_settings:
                raise ScenarioError("assignment must cover every setting")
            for i, x in enumerate(assignment[o]):
                if not 0 <= x < obs.outcomes[i]:
                    raise ScenarioError(
                        f"outcome {x} out of range for {obs.name!r} setting {i}"
                    )
                flat = flat * obs.outcomes[i] + x
        return flat

    def assignment_at(self, idx: int) -> Assignment:
        if not 0 <= idx < self.n_lambda:
            raise ScenarioError(f"assignment index {idx} out of range")
        digits: list[int] = []
        for obs in reversed(self.observers):
            for k in reversed(obs.outcomes):
                idx, rem = divmod(idx, k)
                digits.append(rem)
        digits.reverse()
        out, pos = [], 0
        for obs in self.observers:
            out.append(tuple(digits[pos : pos + obs.n_settings]))
            pos += obs.n_settings
        return tuple(out)

    def enumerate_assignments(self) -> Iterator[Assignment]:
        """All deterministic assignments in canonical (flat-index) order."""
        per_setting = [
            range(k) for obs in self.observers for k in obs.outcomes
        ]
        widths = [obs.n_settings for obs in self.observers]
        for digits in itertools.product(*per_setting):
            out, pos = [], 0
            for w in widths:
                out.append(digits[pos : pos + w])
                pos += w
            yield tuple(out)

    # -- canonical text ------------------------------------------------------

    def canonical_text(self) -> str:
        lines = [
            f"observer {obs.name}: " + " ".join(str(k) for k in obs.outcomes)
            for obs in self.observers
        ]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ScenarioCounts:
    """The five structural counts attached to a scenario."""

    n_k: int
    n_lambda: int
    n_t: int
    n_z: int
    n_d: int


def make_scenario(*outcome_lists: list[int] | tuple[int, ...], names: list[str] | None = None) -> Scenario:
    """Shorthand constructor: one outcome-count list per observer."""
    if names is None:
        names = [chr(ord("A") + i) for i in range(len(outcome_lists))]
    return Scenario(
        tuple(
            ObserverSpec(name, tuple(counts))
            for name, counts in zip(names, outcome_lists)
        )
    )


def parse_scenario(text: str) -> Scenario:
    """Parse the scenario file format.

    One line per observer: ``observer <name>: <k1> <k2> ...`` where ``ki``
    is the outcome count of setting ``i``.  ``#`` begins a comment, blank
    lines are ignored, observer order in the file is the canonical order.
    """
    observers: list[ObserverSpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("observer"):
            raise ScenarioError(f"line {lineno}: expected 'observer <name>: ...'")
        rest = line[len("observer") :].strip()
        name, sep, counts_text = rest.partition(":")
        if not sep or not name.strip():
            raise ScenarioError(f"line {lineno}: missing observer name or ':'")
        try:
            counts = tuple(int(tok) for tok in counts_text.split())
        except ValueError as exc:
            raise ScenarioError(f"line {lineno}: bad outcome count: {exc}") from exc
        if not counts:
            raise ScenarioError(f"line {lineno}: observer has no settings")
        if any(k < 1 for k in counts):
            raise ScenarioError(f"line {lineno}: outcome counts must be >= 1")
        observers.append(ObserverSpec(name.strip(), counts))
    if len(observers) < 2:
        raise ScenarioError("scenario file must declare at least 2 observers")
    return Scenario(tuple(observers))


def counts(s: Scenario) -> ScenarioCounts:
    """Structural counts of a scenario.

    For two observers the span of the deterministic vectors factorizes per
    observer, each factor having dimension ``sum(outcomes) - n_settings + 1``,
    which gives a closed formula for ``n_d``.  For more observers no closed
    formula is assumed: ``n_d`` is the exact integer rank of the span of all
    deterministic vectors.
    """
    n_k, n_lambda, n_t = s.n_k, s.n_lambda, s.n_t
    if s.n_observers == 2:
        n_d = math.prod(
            obs.total_outcomes - obs.n_settings + 1 for obs in s.observers
        )
    else:
        from . import detvectors

        n_d = detvectors.span_rank(s)
    return ScenarioCounts(n_k=n_k, n_lambda=n_lambda, n_t=n_t, n_z=n_k - n_d, n_d=n_d)
