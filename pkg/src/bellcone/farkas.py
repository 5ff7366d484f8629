"""Inequality vectors over coincidence space and their graphical generators.

An integer vector F over coincidence space whose pattern score
``sum_K B_K F_K`` is bounded below by 0 for every deterministic pattern B
defines a constraint every locally-explainable probability vector must
satisfy.  This module validates arbitrary integer vectors (computing
tight score bounds), generates the Clauser-Horne family by the block
construction for two designated observers (arbitrary outcome partitions,
extra observers frozen to a single slab), and decomposes chained
variants into four-sector ones.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import nullspace
from .detvectors import DEFAULT_GUARD, b_matrix_cached
from .scenario import Scenario, ScenarioError


@dataclass(frozen=True)
class FarkasVector:
    """An integer coincidence-space vector with tight pattern-score bounds.

    ``lower``/``upper`` are the exact min/max of the score over all
    deterministic assignments when ``certified`` is true; otherwise they
    come from a random sample and are only bracketing estimates.
    """

    components: tuple[int, ...]
    lower: int
    upper: int
    provenance: str = "user-supplied"
    certified: bool = True

    @property
    def is_farkas(self) -> bool:
        """True when every deterministic pattern scores >= 0."""
        return self.lower >= 0

    @property
    def proper(self) -> bool:
        """True for the normalized form whose lower bound is exactly 0."""
        return self.lower == 0


def scores(s: Scenario, vec: Sequence[int], *, guard: int | None = None) -> np.ndarray:
    """Pattern score of ``vec`` against every deterministic assignment."""
    if len(vec) != s.n_k:
        raise ScenarioError(f"vector length {len(vec)} != n_k {s.n_k}")
    mat = b_matrix_cached(s, guard=guard)
    arr = np.asarray(vec, dtype=object)
    # int64 is fine unless components are huge (certificates can be).
    bound = max((abs(int(v)) for v in vec), default=0)
    if bound * s.n_t < 2**62:
        return mat @ np.asarray(vec, dtype=np.int64)
    return mat.astype(object) @ arr


def validate(
    s: Scenario,
    vec: Sequence[int],
    *,
    provenance: str = "user-supplied",
    guard: int | None = None,
    sample_budget: int | None = None,
    seed: int = 0,
) -> FarkasVector:
    """Recompute tight score bounds for an integer vector.

    Exhaustive over all assignments when their number is within the
    guard; otherwise a ``sample_budget`` must be supplied and the result
    is marked uncertified.
    """
    comps = tuple(int(v) for v in vec)
    if len(comps) != s.n_k:
        raise ScenarioError(f"vector length {len(comps)} != n_k {s.n_k}")
    limit = DEFAULT_GUARD if guard is None else guard
    if s.n_lambda <= limit:
        sc = scores(s, comps, guard=guard)
        return FarkasVector(
            components=comps,
            lower=int(sc.min()),
            upper=int(sc.max()),
            provenance=provenance,
            certified=True,
        )
    if sample_budget is None:
        raise ScenarioError(
            f"{s.n_lambda} assignments exceed the guard of {limit}; "
            "supply a sample budget for an uncertified estimate"
        )
    rng = random.Random(seed)
    lo = hi = None
    from .detvectors import det_ones

    for _ in range(sample_budget):
        assignment = s.assignment_at(rng.randrange(s.n_lambda))
        score = sum(comps[k] for k in det_ones(s, assignment))
        lo = score if lo is None else min(lo, score)
        hi = score if hi is None else max(hi, score)
    return FarkasVector(
        components=comps,
        lower=int(lo),
        upper=int(hi),
        provenance=provenance,
        certified=False,
    )


# -- Clauser-Horne block construction ----------------------------------------


@dataclass(frozen=True)
class ChPartitionSpec:
    """Parameters of one generalized Clauser-Horne vector.

    Two designated observers each contribute two settings; the sector
    (neg_setting_a, neg_setting_b) carries the negative block.  Each
    involved setting's outcomes are split by an ordered bipartition whose
    first part is stored here (the complement is implied).  Every other
    observer is frozen to a single (setting, outcome) slab.
    """

    obs_a: int
    obs_b: int
    neg_setting_a: int
    neg_setting_b: int
    pos_setting_a: int
    pos_setting_b: int
    part_neg_a: tuple[int, ...]
    part_pos_a: tuple[int, ...]
    part_neg_b: tuple[int, ...]
    part_pos_b: tuple[int, ...]
    slabs: tuple[tuple[int, int, int], ...] = ()  # (observer, setting, outcome)

    def check(self, s: Scenario) -> None:
        if self.obs_a == self.obs_b:
            raise ScenarioError("the two designated observers must differ")
        for obs, neg, pos in (
            (self.obs_a, self.neg_setting_a, self.pos_setting_a),
            (self.obs_b, self.neg_setting_b, self.pos_setting_b),
        ):
            n_settings = s.observers[obs].n_settings
            if n_settings < 2:
                raise ScenarioError("designated observers need >= 2 settings")
            if not (0 <= neg < n_settings and 0 <= pos < n_settings) or neg == pos:
                raise ScenarioError("invalid setting pair")
        for obs, setting, part in (
            (self.obs_a, self.neg_setting_a, self.part_neg_a),
            (self.obs_a, self.pos_setting_a, self.part_pos_a),
            (self.obs_b, self.neg_setting_b, self.part_neg_b),
            (self.obs_b, self.pos_setting_b, self.part_pos_b),
        ):
            n_out = s.observers[obs].outcomes[setting]
            chosen = set(part)
            if not part or len(chosen) != len(part):
                raise ScenarioError("partition part must be nonempty without repeats")
            if not chosen <= set(range(n_out)) or len(chosen) == n_out:
                raise ScenarioError("partition part must be a proper outcome subset")
        others = {o for o in range(s.n_observers)} - {self.obs_a, self.obs_b}
        named = [slab[0] for slab in self.slabs]
        if sorted(named) != sorted(others):
            raise ScenarioError("slabs must name each non-designated observer once")
        for obs, setting, outcome in self.slabs:
            if not 0 <= setting < s.observers[obs].n_settings:
                raise ScenarioError("slab setting out of range")
            if not 0 <= outcome < s.observers[obs].outcomes[setting]:
                raise ScenarioError("slab outcome out of range")


def generate_ch(s: Scenario, spec: ChPartitionSpec, *, guard: int | None = None) -> FarkasVector:
    """Build the block vector of a partition spec.

    Within the slab frozen by the extra observers: -1 on the block
    (first part x first part) of the negative sector; +1 on the block of
    the opposite sector (first part x first part of the companion
    settings) and on the two adjacent-sector blocks that share the
    negative block's rows respectively columns, each taken against the
    complement part of the companion setting.  Every deterministic
    pattern then scores 0 or 1.
    """
    spec.check(s)
    comp = [0] * s.n_k
    slab_pairs = {obs: (setting, outcome) for obs, setting, outcome in spec.slabs}

    n_pos_a = s.observers[spec.obs_a].outcomes[spec.pos_setting_a]
    n_pos_b = s.observers[spec.obs_b].outcomes[spec.pos_setting_b]
    comp_pos_a = tuple(x for x in range(n_pos_a) if x not in set(spec.part_pos_a))
    comp_pos_b = tuple(y for y in range(n_pos_b) if y not in set(spec.part_pos_b))

    blocks = (
        (spec.neg_setting_a, spec.part_neg_a, spec.neg_setting_b, spec.part_neg_b, -1),
        (spec.neg_setting_a, spec.part_neg_a, spec.pos_setting_b, comp_pos_b, 1),
        (spec.pos_setting_a, comp_pos_a, spec.neg_setting_b, spec.part_neg_b, 1),
        (spec.pos_setting_a, spec.part_pos_a, spec.pos_setting_b, spec.part_pos_b, 1),
    )
    for setting_a, part_a, setting_b, part_b, value in blocks:
        for x in part_a:
            for y in part_b:
                pairs = []
                for o in range(s.n_observers):
                    if o == spec.obs_a:
                        pairs.append((setting_a, x))
                    elif o == spec.obs_b:
                        pairs.append((setting_b, y))
                    else:
                        pairs.append(slab_pairs[o])
                comp[s.k_index(tuple(pairs))] = value

    limit = DEFAULT_GUARD if guard is None else guard
    if s.n_lambda <= limit:
        fv = validate(s, comp, provenance="graphical", guard=guard)
        if (fv.lower, fv.upper) != (0, 1):
            raise AssertionError("block construction produced wrong bounds")
        return fv
    # Above the guard the bounds hold by construction; mark them as such.
    return FarkasVector(
        components=tuple(comp), lower=0, upper=1, provenance="graphical", certified=False
    )


def _proper_subsets(n: int) -> Iterator[tuple[int, ...]]:
    """Nonempty proper outcome subsets, deterministic mask order."""
    for mask in range(1, (1 << n) - 1):
        yield tuple(i for i in range(n) if mask >> i & 1)


def ch_partition_count(
    s: Scenario,
    obs_a: int,
    neg_setting_a: int,
    pos_setting_a: int,
    obs_b: int,
    neg_setting_b: int,
    pos_setting_b: int,
) -> int:
    """Number of partition choices for one sector choice: prod(2**k - 2)."""
    count = 1
    for obs, setting in (
        (obs_a, neg_setting_a),
        (obs_a, pos_setting_a),
        (obs_b, neg_setting_b),
        (obs_b, pos_setting_b),
    ):
        count *= 2 ** s.observers[obs].outcomes[setting] - 2
    return count


def _slab_choices(s: Scenario, obs_a: int, obs_b: int) -> list[tuple[tuple[int, int, int], ...]]:
    others = [o for o in range(s.n_observers) if o not in (obs_a, obs_b)]
    per_obs = [
        [
            (o, setting, outcome)
            for setting in range(s.observers[o].n_settings)
            for outcome in range(s.observers[o].outcomes[setting])
        ]
        for o in others
    ]
    return [tuple(combo) for combo in itertools.product(*per_obs)]


def enumerate_ch_specs(
    s: Scenario, *, observers: tuple[int, int] | None = None
) -> Iterator[ChPartitionSpec]:
    """All partition specs: observer pairs x sector choices x bipartitions x slabs."""
    pairs = (
        [tuple(sorted(observers))]
        if observers is not None
        else list(itertools.combinations(range(s.n_observers), 2))
    )
    for obs_a, obs_b in pairs:
        if s.observers[obs_a].n_settings < 2 or s.observers[obs_b].n_settings < 2:
            continue
        for slabs in _slab_choices(s, obs_a, obs_b):
            for neg_a, pos_a in itertools.permutations(
                range(s.observers[obs_a].n_settings), 2
            ):
                for neg_b, pos_b in itertools.permutations(
                    range(s.observers[obs_b].n_settings), 2
                ):
                    part_iter = itertools.product(
                        _proper_subsets(s.observers[obs_a].outcomes[neg_a]),
                        _proper_subsets(s.observers[obs_a].outcomes[pos_a]),
                        _proper_subsets(s.observers[obs_b].outcomes[neg_b]),
                        _proper_subsets(s.observers[obs_b].outcomes[pos_b]),
                    )
                    for pna, ppa, pnb, ppb in part_iter:
                        yield ChPartitionSpec(
                            obs_a=obs_a,
                            obs_b=obs_b,
                            neg_setting_a=neg_a,
                            neg_setting_b=neg_b,
                            pos_setting_a=pos_a,
                            pos_setting_b=pos_b,
                            part_neg_a=pna,
                            part_pos_a=ppa,
                            part_neg_b=pnb,
                            part_pos_b=ppb,
                            slabs=slabs,
                        )


def enumerate_ch(
    s: Scenario,
    *,
    observers: tuple[int, int] | None = None,
    dedupe: bool = False,
    limit: int | None = None,
    guard: int | None = None,
) -> Iterator[FarkasVector]:
    """Stream the generated family; optionally one vector per class.

    With ``dedupe`` the stream keeps only the first representative of
    each equivalence class modulo the null span (canonical-form keyed).
    """
    seen: set[tuple[int, ...]] = set()
    emitted = 0
    for spec in enumerate_ch_specs(s, observers=observers):
        fv = generate_ch(s, spec, guard=guard)
        if dedupe:
            key = nullspace.canonicalize(s, fv.components)
            if key in seen:
                continue
            seen.add(key)
        yield fv
        emitted += 1
        if limit is not None and emitted >= limit:
            return


# -- chained variants ---------------------------------------------------------


def _sector_blocks(
    s: Scenario, vec: Sequence[int]
) -> dict[tuple[int, int], tuple[int, frozenset[int], frozenset[int]]] | None:
    """Group nonzero cells by sector; each must be a +-1 full rectangle."""
    by_sector: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    for k, v in enumerate(vec):
        if v == 0:
            continue
        if v not in (-1, 1):
            return None
        (sa, xa), (sb, xb) = s.coincidence_at(k)
        by_sector.setdefault((sa, sb), []).append((xa, xb, v))
    blocks = {}
    for sector, cells in by_sector.items():
        values = {v for _, _, v in cells}
        if len(values) != 1:
            return None
        rows = frozenset(x for x, _, _ in cells)
        cols = frozenset(y for _, y, _ in cells)
        if len(cells) != len(rows) * len(cols):
            return None
        blocks[sector] = (values.pop(), rows, cols)
    return blocks


def chain_decompose(
    s: Scenario, f: FarkasVector, *, guard: int | None = None
) -> list[FarkasVector] | None:
    """Split a closed-chain vector into ordinary four-sector ones.

    The input must be a two-observer vector whose nonzero cells form
    full +-1 rectangles, one rectangle per sector, the sectors forming a
    single closed chain over 2k sectors with exactly one negative
    rectangle.  Returns k-1 four-sector vectors whose componentwise sum
    equals the input (the shared diagonal blocks cancel); for k = 2 the
    input is returned unchanged.  Returns None when the pattern does not
    match.
    """
    if s.n_observers != 2:
        return None
    blocks = _sector_blocks(s, f.components)
    if not blocks:
        return None
    negatives = [sec for sec, (v, _, _) in blocks.items() if v < 0]
    if len(negatives) != 1 or len(blocks) % 2 != 0 or len(blocks) < 4:
        return None
    k = len(blocks) // 2

    # Every involved setting must sit in exactly two support sectors.
    a_edges: dict[int, list[tuple[int, int]]] = {}
    b_edges: dict[int, list[tuple[int, int]]] = {}
    for sa, sb in blocks:
        a_edges.setdefault(sa, []).append((sa, sb))
        b_edges.setdefault(sb, []).append((sa, sb))
    if any(len(e) != 2 for e in a_edges.values()) or any(
        len(e) != 2 for e in b_edges.values()
    ):
        return None
    if len(a_edges) != k or len(b_edges) != k:
        return None

    def other_edge(edges: list[tuple[int, int]], current: tuple[int, int]):
        if current not in edges:
            return None
        return edges[1] if edges[0] == current else edges[0]

    # Walk outward from the negative sector in both directions at once.
    # Each round discovers the next Alice setting (through the newest Bob
    # vertex) and the next Bob setting (through the newest Alice vertex);
    # the sides meet at the closing diagonal sector.  Shared settings
    # carry the same part into the neighbour sector on the negative side
    # and the complementary part everywhere else.
    neg = negatives[0]
    a_settings = [neg[0]]
    b_settings = [neg[1]]
    part_a = [set(blocks[neg][1])]
    part_b = [set(blocks[neg][2])]
    used = {neg}
    consumed_at_b = neg  # edge already consumed at the newest Bob vertex
    consumed_at_a = neg  # edge already consumed at the newest Alice vertex
    closing = None
    while True:
        e_a = other_edge(b_edges[b_settings[-1]], consumed_at_b)
        e_b = other_edge(a_edges[a_settings[-1]], consumed_at_a)
        if e_a is None or e_b is None:
            return None
        if e_a == e_b:
            closing = e_a
            break
        if e_a in used or e_b in used:
            return None
        _, rows_a, cols_a = blocks[e_a]
        _, rows_b, cols_b = blocks[e_b]
        if set(cols_a) != part_b[-1] or set(rows_b) != part_a[-1]:
            return None
        new_a, new_b = e_a[0], e_b[1]
        if new_a in a_settings or new_b in b_settings:
            return None
        a_settings.append(new_a)
        part_a.append(set(range(s.observers[0].outcomes[new_a])) - set(rows_a))
        b_settings.append(new_b)
        part_b.append(set(range(s.observers[1].outcomes[new_b])) - set(cols_b))
        used.add(e_a)
        used.add(e_b)
        consumed_at_b = e_b
        consumed_at_a = e_a

    if closing in used or closing != (a_settings[-1], b_settings[-1]):
        return None
    value, rows, cols = blocks[closing]
    if value != 1 or set(rows) != part_a[-1] or set(cols) != part_b[-1]:
        return None
    if len(used) + 1 != len(blocks) or len(a_settings) != k:
        return None
    for part, settings, obs in ((part_a, a_settings, 0), (part_b, b_settings, 1)):
        for p, setting in zip(part, settings):
            if not p or len(p) == s.observers[obs].outcomes[setting]:
                return None

    if k == 2:
        return [f]

    pieces = []
    for t in range(k - 1):
        spec = ChPartitionSpec(
            obs_a=0,
            obs_b=1,
            neg_setting_a=a_settings[t],
            neg_setting_b=b_settings[t],
            pos_setting_a=a_settings[t + 1],
            pos_setting_b=b_settings[t + 1],
            part_neg_a=tuple(sorted(part_a[t])),
            part_pos_a=tuple(sorted(part_a[t + 1])),
            part_neg_b=tuple(sorted(part_b[t])),
            part_pos_b=tuple(sorted(part_b[t + 1])),
        )
        pieces.append(generate_ch(s, spec, guard=guard))
    total = [0] * s.n_k
    for piece in pieces:
        for i, v in enumerate(piece.components):
            total[i] += v
    if tuple(total) != f.components:
        raise AssertionError("chain pieces do not telescope back to the input")
    return pieces


def concentrate_negatives(
    s: Scenario, vec: Sequence[int], target_sector: tuple[int, ...]
) -> list[int]:
    """Equivalent form with every negative cell inside one sector.

    Adds line null vectors: a negative cell whose sector differs from the
    target at some observer is cancelled by a +1 line there, paid for by
    a -1 line in the target-side setting of that observer.  Observers are
    processed in order, so moves never reintroduce earlier defects.
    """
    out = [int(v) for v in vec]
    for observer in range(s.n_observers):
        changed = True
        while changed:
            changed = False
            for k in range(s.n_k):
                if out[k] >= 0:
                    continue
                pairs = s.coincidence_at(k)
                setting = pairs[observer][0]
                if setting == target_sector[observer]:
                    continue
                amount = -out[k]
                context = tuple(p for o, p in enumerate(pairs) if o != observer)
                src = _line(s, observer, setting, context)
                dst = _line(s, observer, target_sector[observer], context)
                for cell in src:
                    out[cell] += amount
                for cell in dst:
                    out[cell] -= amount
                changed = True
    return out


def _line(
    s: Scenario, observer: int, setting: int, context: tuple[tuple[int, int], ...]
) -> list[int]:
    cells = []
    for outcome in range(s.observers[observer].outcomes[setting]):
        pairs = []
        ctx = iter(context)
        for o in range(s.n_observers):
            pairs.append((setting, outcome) if o == observer else next(ctx))
        cells.append(s.k_index(tuple(pairs)))
    return cells


# -- inequality file format ----------------------------------------------------


def format_farkas(s: Scenario, fv: FarkasVector) -> str:
    header = f"farkas {s.digest()} m={fv.lower} n={fv.upper}"
    return header + "\n" + " ".join(str(v) for v in fv.components) + "\n"


def parse_farkas(s: Scenario, text: str) -> tuple[FarkasVector, int, int]:
    """Parse and revalidate an inequality file.

    Returns the revalidated vector plus the bounds claimed in the header
    (callers decide whether a mismatch is an error).
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("farkas "):
        raise ScenarioError("inequality file must start with a 'farkas' header")
    fields = lines[0].split()
    if len(fields) != 4 or not fields[2].startswith("m=") or not fields[3].startswith("n="):
        raise ScenarioError("malformed inequality header")
    if fields[1] != s.digest():
        raise ScenarioError(
            f"inequality file is for scenario {fields[1]}, not {s.digest()}"
        )
    try:
        header_m, header_n = int(fields[2][2:]), int(fields[3][2:])
        values = [int(tok) for tok in " ".join(lines[1:]).split()]
    except ValueError as exc:
        raise ScenarioError(f"malformed inequality body: {exc}") from exc
    if len(values) != s.n_k:
        raise ScenarioError(f"expected {s.n_k} components, found {len(values)}")
    return validate(s, values), header_m, header_n
