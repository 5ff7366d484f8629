"""Exact convex-geometry engine for the local cone.

Membership of a coincidence-probability vector in the cone of
deterministic vectors is decided by an exact rational feasibility solve;
an infeasible vector comes back with an integer separating certificate
that is re-verified against every deterministic pattern before being
reported.  Candidate faces are tested by the orientation (sign) of
bordered Gram determinants, and the supporting integer inequality of a
face is read off the same cofactors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import facecore, farkas, nullspace, scenario as scenario_mod
from .detvectors import DEFAULT_GUARD, b_matrix_cached, gram
from .intlinalg import dot, primitive_integer
from .ratlp import feasible_point, solve_min
from .scenario import Scenario, ScenarioError

# Above this many assignments, certificate refinement (two auxiliary
# rational programs with one row per assignment) is skipped and the raw
# dual certificate is reported instead.
REFINE_GUARD = 4096


# -- probability vectors -------------------------------------------------------


def rationalize(x: float | int | Fraction, tol: float | Fraction) -> Fraction:
    """Best small-denominator rational within ``tol`` of ``x``.

    Walks the continued-fraction convergents of the exact binary value of
    ``x`` and returns the first one inside the tolerance, so results are
    reproducible and denominators as small as possible.
    """
    target = Fraction(x)
    tol = Fraction(tol)
    if tol <= 0:
        return target
    p_prev2, q_prev2 = 0, 1
    p_prev, q_prev = 1, 0
    rem = target
    while True:
        a = rem.numerator // rem.denominator
        p = a * p_prev + p_prev2
        q = a * q_prev + q_prev2
        conv = Fraction(p, q)
        if abs(conv - target) <= tol:
            return conv
        rem = 1 / (rem - a)
        p_prev2, q_prev2 = p_prev, q_prev
        p_prev, q_prev = p, q


@dataclass(frozen=True)
class IngestReport:
    """Defects observed while ingesting a probability vector."""

    normalization: Fraction  # sum of components minus the expected total
    max_signaling: Fraction  # largest |residual| against a null vector


@dataclass(frozen=True)
class ProbVector:
    """Rational coincidence probabilities plus ingestion metadata."""

    components: tuple[Fraction, ...]
    n_t: int
    tolerance: Fraction | None
    report: IngestReport
    source: tuple[float, ...] | None = None

    @property
    def no_signaling(self) -> bool:
        return self.report.max_signaling == 0

    @property
    def normalized(self) -> bool:
        return self.report.normalization == 0


def ingest_probabilities(
    s: Scenario,
    values: Iterable[float | int | str | Fraction],
    *,
    tolerance: float | Fraction = Fraction(1, 10**9),
    strict: bool = False,
) -> ProbVector:
    """Turn raw values into an exact ProbVector.

    Exact rationals (``Fraction``, int, or ``p/q`` strings) pass through
    unchanged; floats and decimal strings are rationalized by
    continued-fraction approximation within ``tolerance``.  Negative
    components are rejected outright; normalization and signaling defects
    are measured exactly and reported, and rejected in strict mode when
    they exceed ``n_k * tolerance``.
    """
    raw = list(values)
    if len(raw) != s.n_k:
        raise ScenarioError(f"expected {s.n_k} values, found {len(raw)}")
    tol = Fraction(tolerance)
    comps: list[Fraction] = []
    floats: list[float] = []
    any_float = False
    for v in raw:
        if isinstance(v, str):
            text = v.strip()
            if "/" in text or _is_int_literal(text):
                comps.append(Fraction(text))
                floats.append(float(Fraction(text)))
                continue
            v = float(text)
        if isinstance(v, float) or isinstance(v, np.floating):
            any_float = True
            floats.append(float(v))
            comps.append(rationalize(float(v), tol))
        else:
            comps.append(Fraction(v))
            floats.append(float(Fraction(v)))
    for i, c in enumerate(comps):
        if c < 0:
            raise ScenarioError(f"component {i} is negative ({c})")
    normalization = sum(comps) - s.n_t
    residuals = nullspace.no_signaling_defect(s, comps)
    max_sig = max((abs(r) for _, r in residuals), default=Fraction(0))
    report = IngestReport(normalization=Fraction(normalization), max_signaling=max_sig)
    if strict:
        bound = tol * s.n_k
        if abs(normalization) > bound:
            raise ScenarioError(
                f"normalization defect {normalization} exceeds strict bound {bound}"
            )
        if max_sig > bound:
            raise ScenarioError(
                f"signaling residual {max_sig} exceeds strict bound {bound}"
            )
    return ProbVector(
        components=tuple(comps),
        n_t=s.n_t,
        tolerance=tol if any_float else None,
        report=report,
        source=tuple(floats),
    )


def _is_int_literal(text: str) -> bool:
    body = text[1:] if text[:1] in "+-" else text
    return body.isdigit()


def format_pvec(s: Scenario, values: Sequence[Fraction | float]) -> str:
    header = f"pvec {s.digest()}"
    body = " ".join(
        str(v) if isinstance(v, Fraction) else repr(float(v)) for v in values
    )
    return header + "\n" + body + "\n"


def parse_pvec(
    s: Scenario,
    text: str,
    *,
    tolerance: float | Fraction = Fraction(1, 10**9),
    strict: bool = False,
) -> ProbVector:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("pvec "):
        raise ScenarioError("probability file must start with a 'pvec' header")
    digest = lines[0].split()[1]
    if digest != s.digest():
        raise ScenarioError(
            f"probability file is for scenario {digest}, not {s.digest()}"
        )
    tokens = " ".join(lines[1:]).split()
    return ingest_probabilities(s, tokens, tolerance=tolerance, strict=strict)


# -- membership ---------------------------------------------------------------


@dataclass(frozen=True)
class Inside:
    """Exact nonnegative weights reconstructing the queried vector
    (its no-signaling content, when the input carried a defect)."""

    weights: tuple[Fraction, ...]
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Outside:
    """A separating certificate, re-verified against every pattern."""

    certificate: farkas.FarkasVector
    violation: Fraction
    notes: tuple[str, ...] = ()


MembershipResult = Inside | Outside


def decide_membership(
    s: Scenario,
    p: ProbVector | Sequence[Fraction | int],
    *,
    refine: bool = True,
    guard: int | None = None,
) -> MembershipResult:
    """Exact rational membership decision for the local cone.

    Input defects (negative component, wrong total, signaling) are
    measured exactly and reported in the result notes, never repaired
    silently.  A vector with signaling content cannot lie in the span of
    the deterministic vectors at all, so the verdict is taken on its
    no-signaling content (the exact orthogonal split against the null
    span); for clean inputs the two coincide.  Inside results carry
    weights with ``sum(w * B)`` equal to that content exactly; Outside
    certificates score >= 0 on every deterministic vector and < 0 on the
    original input (they are projected onto the span, where the
    signaling content contributes nothing).
    """
    values = (
        list(p.components) if isinstance(p, ProbVector) else [Fraction(v) for v in p]
    )
    if len(values) != s.n_k:
        raise ScenarioError(f"vector length {len(values)} != n_k {s.n_k}")
    notes = _invariant_notes(s, values, p if isinstance(p, ProbVector) else None)
    span_part, null_part = nullspace.split_off_null(s, values)
    clean = all(v == 0 for v in null_part)
    if not clean:
        notes = notes + (
            "verdict refers to the no-signaling content of the input",
        )

    mat = b_matrix_cached(s, guard=guard)
    rows = [[int(mat[lam, k]) for lam in range(s.n_lambda)] for k in range(s.n_k)]
    res = feasible_point(rows, span_part)
    if res.status == "optimal":
        weights = tuple(res.x)
        recon = [
            sum(w * int(mat[lam, k]) for lam, w in enumerate(weights) if w)
            for k in range(s.n_k)
        ]
        if recon != span_part:
            raise AssertionError("feasible weights fail to reconstruct the input")
        return Inside(weights=weights, notes=notes)

    dual = res.separating_dual
    raw = [-y for y in dual]
    raw_scores = [_frac_dot_row(mat, lam, raw) for lam in range(s.n_lambda)]
    if min(raw_scores) < 0 or dot(raw, span_part) >= 0:
        raise AssertionError("dual certificate failed re-verification")

    if refine and s.n_lambda <= REFINE_GUARD:
        cert_vec = _refine_certificate(s, mat, span_part)
        if not clean:
            # Meaningful against the raw input only once orthogonal to the
            # null span; projection keeps every pattern score unchanged.
            cert_span, _ = nullspace.split_off_null(s, cert_vec)
            cert_vec = primitive_integer(cert_span, orient="keep")
    else:
        if not clean:
            raw, _ = nullspace.split_off_null(s, raw)
        cert_vec = primitive_integer(raw, orient="keep")
    certificate = farkas.validate(s, cert_vec, provenance="certificate", guard=guard)
    if certificate.lower < 0:
        raise AssertionError("refined certificate lost validity")
    violation = Fraction(dot(certificate.components, values))
    if violation >= 0:
        raise AssertionError("certificate does not separate the input")
    return Outside(certificate=certificate, violation=violation, notes=notes)


def _invariant_notes(
    s: Scenario, values: list[Fraction], p: ProbVector | None
) -> tuple[str, ...]:
    notes = []
    negatives = [i for i, v in enumerate(values) if v < 0]
    if negatives:
        notes.append(f"negative components at {negatives}")
    total = sum(values)
    if total != s.n_t:
        notes.append(f"total {total} != expected {s.n_t}")
    if p is not None:
        if p.report.max_signaling != 0:
            notes.append(f"signaling residual up to {p.report.max_signaling}")
    else:
        residuals = nullspace.no_signaling_defect(s, values)
        worst = max((abs(r) for _, r in residuals), default=Fraction(0))
        if worst != 0:
            notes.append(f"signaling residual up to {worst}")
    return tuple(notes)


def _frac_dot_row(mat: np.ndarray, lam: int, vec: list[Fraction]) -> Fraction:
    total = Fraction(0)
    for k in np.nonzero(mat[lam])[0]:
        total += vec[int(k)]
    return total


def _refine_certificate(
    s: Scenario, mat: np.ndarray, values: list[Fraction]
) -> tuple[int, ...]:
    """Deepest unit-normalized separator, then its sparsest class member.

    First program: minimize ``p . f`` over vectors whose pattern scores
    all lie in [0, 1] (the natural normalization for inequality depth).
    Second program: among vectors with exactly those scores (same class,
    same scale), minimize the l1 norm, which concentrates the certificate
    on few cells.  Both are exact; the result is cleared to integers with
    positive scaling only.
    """
    n_k, n_lam = s.n_k, s.n_lambda
    b_rows = [[int(v) for v in mat[lam]] for lam in range(n_lam)]

    # Variables: f+ (n_k), f- (n_k), u (n_lam), v (n_lam).
    n_vars = 2 * n_k + 2 * n_lam
    rows: list[list[int]] = []
    rhs: list[int] = []
    for lam in range(n_lam):
        row = [0] * n_vars
        for k in range(n_k):
            row[k] = b_rows[lam][k]
            row[n_k + k] = -b_rows[lam][k]
        row[2 * n_k + lam] = -1
        rows.append(row)
        rhs.append(0)
    for lam in range(n_lam):
        row = [0] * n_vars
        row[2 * n_k + lam] = 1
        row[2 * n_k + n_lam + lam] = 1
        rows.append(row)
        rhs.append(1)
    cost = [values[k] for k in range(n_k)] + [-values[k] for k in range(n_k)]
    cost += [Fraction(0)] * (2 * n_lam)
    res = solve_min(cost, rows, rhs)
    if res.status != "optimal" or res.objective >= 0:
        raise AssertionError("violation program failed to separate")
    f_star = [res.x[k] - res.x[n_k + k] for k in range(n_k)]
    target_scores = [
        sum(Fraction(b_rows[lam][k]) * f_star[k] for k in range(n_k))
        for lam in range(n_lam)
    ]

    # Sparsest member of the class with these scores: min sum(g+ + g-).
    n_vars = 2 * n_k
    rows = []
    for lam in range(n_lam):
        row = [0] * n_vars
        for k in range(n_k):
            row[k] = b_rows[lam][k]
            row[n_k + k] = -b_rows[lam][k]
        rows.append(row)
    res2 = solve_min([Fraction(1)] * n_vars, rows, target_scores)
    if res2.status != "optimal":
        raise AssertionError("sparsification program infeasible")
    g = [res2.x[k] - res2.x[n_k + k] for k in range(n_k)]
    return primitive_integer(g, orient="keep")


# -- faces of the cone ---------------------------------------------------------


@dataclass(frozen=True)
class FaceCandidate:
    """A subset of assignment indices plus its orientation data."""

    subset: tuple[int, ...]
    verdict: str  # "face" | "interior" | "degenerate"
    cofactors: tuple[int, ...] | None = None
    orientation: int = 0  # sign making every outside determinant >= 0


def face_test(
    s: Scenario, subset: Sequence[int], *, guard: int | None = None
) -> FaceCandidate:
    """Orientation test: does the subset span a supporting hyperplane?

    The bordered determinant of each outside vector must not change
    strict sign; vectors landing exactly on the hyperplane are allowed
    (large faces are supported by more vectors than a minimal spanning
    set).  A subset whose own minor system is singular is degenerate.
    """
    d = scenario_mod.counts(s).n_d
    sub = tuple(subset)
    if len(sub) != d - 1 or len(set(sub)) != len(sub):
        raise ScenarioError(f"subset must hold {d - 1} distinct assignment indices")
    if any(not 0 <= lam < s.n_lambda for lam in sub):
        raise ScenarioError("assignment index out of range")
    g = gram(s, guard=guard).entries
    cof = _subset_cofactors(g, sub)
    if cof is None:
        return FaceCandidate(subset=sub, verdict="degenerate")
    dets = _border_determinants(g, sub, cof)
    pos = any(v > 0 for v in dets)
    neg = any(v < 0 for v in dets)
    if pos and neg:
        return FaceCandidate(subset=sub, verdict="interior", cofactors=tuple(cof))
    if not pos and not neg:
        return FaceCandidate(subset=sub, verdict="degenerate", cofactors=tuple(cof))
    return FaceCandidate(
        subset=sub,
        verdict="face",
        cofactors=tuple(cof),
        orientation=1 if pos else -1,
    )


def _subset_cofactors(g: np.ndarray, subset: tuple[int, ...]) -> list[int] | None:
    """Cofactor vector of the bordered block for one subset.

    The first column holds each row's dot product with the sum of the
    vectors OUTSIDE the subset (subtracting the subset's own columns from
    the full interior sum leaves the determinants unchanged and the
    entries smaller); the remaining columns are the subset's Gram block.
    """
    idx = list(subset)
    c0 = g.sum(axis=1) - g[:, idx].sum(axis=1)
    block = np.column_stack((c0[idx], g[np.ix_(idx, idx)]))
    return facecore.face_cofactors(block)


def _border_determinants(
    g: np.ndarray, subset: tuple[int, ...], cof: Sequence[int]
) -> list[int]:
    idx = list(subset)
    member = set(subset)
    c0 = g.sum(axis=1) - g[:, idx].sum(axis=1)
    dets = []
    for kappa in range(g.shape[0]):
        if kappa in member:
            continue
        border = [int(c0[kappa])] + [int(g[kappa, j]) for j in idx]
        dets.append(sum(b * c for b, c in zip(border, cof)))
    return dets


def extract_farkas(
    s: Scenario, candidate: FaceCandidate, *, guard: int | None = None
) -> farkas.FarkasVector:
    """Integer inequality supported by a face.

    Contracts the cofactors with the border columns (outside-sum vector
    and subset rows), orients the result so the interior of the cone
    scores positive, and reduces to a primitive integer vector.  Members
    of the subset score exactly 0, so the lower bound is 0.
    """
    if candidate.verdict != "face":
        raise ScenarioError(f"cannot extract from a {candidate.verdict} candidate")
    mat = b_matrix_cached(s, guard=guard)
    idx = list(candidate.subset)
    cof = candidate.cofactors
    outside_sum = mat.sum(axis=0) - mat[idx].sum(axis=0)
    vec = [cof[0] * int(outside_sum[k]) for k in range(s.n_k)]
    for j, lam in enumerate(idx, start=1):
        c = cof[j]
        if c:
            for k in np.nonzero(mat[lam])[0]:
                vec[int(k)] += c
    vec = [candidate.orientation * v for v in vec]
    comps = primitive_integer(vec, orient="keep")
    fv = farkas.validate(s, comps, provenance="facet-enumeration", guard=guard)
    if fv.lower != 0:
        raise AssertionError("face inequality must be tight at 0")
    return fv


@dataclass(frozen=True)
class FacetClass:
    canonical: tuple[int, ...]
    vector: farkas.FarkasVector
    trivial: bool
    subset: tuple[int, ...]


@dataclass(frozen=True)
class FacetFamily:
    classes: tuple[FacetClass, ...]
    n_subsets: int
    n_faces: int
    n_interior: int
    n_degenerate: int
    shard: tuple[int, int] | None = None

    @property
    def nontrivial(self) -> tuple[FacetClass, ...]:
        return tuple(c for c in self.classes if not c.trivial)

    @property
    def trivial(self) -> tuple[FacetClass, ...]:
        return tuple(c for c in self.classes if c.trivial)


def enumerate_facets(
    s: Scenario,
    *,
    budget: int = 2_000_000,
    shard: tuple[int, int] | None = None,
    guard: int | None = None,
) -> FacetFamily:
    """Scan every subset of n_d - 1 assignments for supporting hyperplanes.

    Results are deduplicated by canonical form and partitioned into
    trivial classes (equivalent to a vector without negative components,
    hence implied by positivity alone) and nontrivial ones.  ``shard``
    = (i, n) processes every n-th subset, so a disjoint shard union
    reproduces the unsharded scan.
    """
    d = scenario_mod.counts(s).n_d
    total = math.comb(s.n_lambda, d - 1)
    n_shards = shard[1] if shard else 1
    if shard is not None:
        if not (0 <= shard[0] < shard[1]):
            raise ScenarioError("shard must satisfy 0 <= i < n")
    if total // n_shards > budget:
        raise ScenarioError(
            f"{total} subsets exceed budget {budget}; increase the budget or shard"
        )
    g = gram(s, guard=guard).entries
    mat = b_matrix_cached(s, guard=guard)

    n_faces = n_interior = n_degenerate = 0
    n_scanned = 0
    by_scorekey: dict[tuple[int, ...], FaceCandidate] = {}
    for pos, subset in enumerate(itertools.combinations(range(s.n_lambda), d - 1)):
        if shard is not None and pos % shard[1] != shard[0]:
            continue
        n_scanned += 1
        cof = _subset_cofactors(g, subset)
        if cof is None:
            n_degenerate += 1
            continue
        dets = _border_determinants(g, subset, cof)
        pos_any = any(v > 0 for v in dets)
        neg_any = any(v < 0 for v in dets)
        if pos_any and neg_any:
            n_interior += 1
            continue
        if not pos_any and not neg_any:
            n_degenerate += 1
            continue
        n_faces += 1
        orientation = 1 if pos_any else -1
        scores = [0] * s.n_lambda
        it = iter(dets)
        member = set(subset)
        for lam in range(s.n_lambda):
            if lam not in member:
                scores[lam] = orientation * next(it)
        key = primitive_integer(scores, orient="keep")
        if key not in by_scorekey:
            by_scorekey[key] = FaceCandidate(
                subset=tuple(subset),
                verdict="face",
                cofactors=tuple(cof),
                orientation=orientation,
            )

    classes = []
    seen_canonical = set()
    for candidate in by_scorekey.values():
        fv = extract_farkas(s, candidate, guard=guard)
        canonical = nullspace.canonicalize(s, fv.components)
        if canonical in seen_canonical:
            continue
        seen_canonical.add(canonical)
        classes.append(
            FacetClass(
                canonical=canonical,
                vector=fv,
                trivial=class_has_nonnegative_member(s, fv.components),
                subset=candidate.subset,
            )
        )
    classes.sort(key=lambda c: c.canonical)
    return FacetFamily(
        classes=tuple(classes),
        n_subsets=n_scanned,
        n_faces=n_faces,
        n_interior=n_interior,
        n_degenerate=n_degenerate,
        shard=shard,
    )


def class_has_nonnegative_member(s: Scenario, vec: Sequence[int]) -> bool:
    """Is some member of ``vec``'s class componentwise nonnegative?

    Exact feasibility of ``vec + combination of null vectors >= 0``.
    Such classes are implied by positivity of probabilities alone.
    """
    basis = nullspace.null_basis(s)
    r = len(basis)
    n_vars = 2 * r + s.n_k
    rows = []
    for k in range(s.n_k):
        row = [0] * n_vars
        for sigma in range(r):
            row[sigma] = basis[sigma][k]
            row[r + sigma] = -basis[sigma][k]
        row[2 * r + k] = -1
        rows.append(row)
    rhs = [-int(v) for v in vec]
    return feasible_point(rows, rhs).status == "optimal"
