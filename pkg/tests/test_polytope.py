import math
import random
from fractions import Fraction

import pytest

from bellcone import detvectors as dv, farkas as fk, nullspace as ns, polytope as pt
from bellcone import scenario as sm
from bellcone.scenario import ScenarioError

from conftest import brute_score, pr_box, random_vertex_mixture


# -- rationalization and ingestion ------------------------------------------------


def test_rationalize_simple():
    assert pt.rationalize(0.5, Fraction(1, 10**9)) == Fraction(1, 2)
    assert pt.rationalize(0.25, Fraction(1, 10**9)) == Fraction(1, 4)
    third = 1 / 3
    assert pt.rationalize(third, Fraction(1, 10**6)) == Fraction(1, 3)


def test_rationalize_snaps_small_noise():
    assert pt.rationalize(-1e-17, Fraction(1, 10**9)) == 0
    assert pt.rationalize(1.0000000001e0, Fraction(1, 10**6)) == 1


def test_rationalize_zero_tolerance_is_exact():
    x = 0.1
    assert pt.rationalize(x, 0) == Fraction(x)


def test_ingest_exact_passthrough(chsh):
    vertex = dv.det_vector(chsh, ((0, 0), (0, 0))).dense()
    p = pt.ingest_probabilities(chsh, [Fraction(v) for v in vertex])
    assert list(p.components) == vertex
    assert p.tolerance is None
    assert p.normalized and p.no_signaling


def test_ingest_string_forms(chsh):
    vertex = dv.det_vector(chsh, ((0, 0), (0, 0))).dense()
    tokens = [("1/1" if v else "0") for v in vertex]
    p = pt.ingest_probabilities(chsh, tokens)
    assert sum(p.components) == 4


def test_ingest_rejects_wrong_length(chsh):
    with pytest.raises(ScenarioError):
        pt.ingest_probabilities(chsh, ["0"] * 15)


def test_ingest_rejects_negative(chsh):
    values = [Fraction(0)] * 16
    values[0] = Fraction(-1, 5)
    with pytest.raises(ScenarioError):
        pt.ingest_probabilities(chsh, values)


def test_ingest_strict_rejects_defects(chsh):
    values = [Fraction(1, 4)] * 16  # normalized but fine; now break one cell
    values[0] = Fraction(1, 2)
    with pytest.raises(ScenarioError):
        pt.ingest_probabilities(chsh, values, strict=True)
    report = pt.ingest_probabilities(chsh, values).report
    assert report.normalization == Fraction(1, 4)
    assert report.max_signaling > 0


def test_pvec_roundtrip(chsh):
    p = pr_box(chsh)
    text = pt.format_pvec(chsh, p)
    parsed = pt.parse_pvec(chsh, text)
    assert list(parsed.components) == p


def test_pvec_digest_mismatch(chsh):
    other = sm.make_scenario([2, 2], [2, 3])
    text = pt.format_pvec(other, [Fraction(0)] * other.n_k)
    with pytest.raises(ScenarioError):
        pt.parse_pvec(chsh, text)


# -- membership -------------------------------------------------------------------


def test_vertex_is_inside_with_unit_weight(chsh):
    for lam in (0, 6, 15):
        vertex = dv.det_vector(chsh, chsh.assignment_at(lam)).dense()
        res = pt.decide_membership(chsh, [Fraction(v) for v in vertex])
        assert isinstance(res, pt.Inside)
        assert res.weights[lam] == 1
        assert sum(res.weights) == 1


def test_uniform_mixture_is_inside(chsh):
    iv = dv.interior_vector(chsh)
    p = [Fraction(v, chsh.n_lambda) for v in iv.components]
    res = pt.decide_membership(chsh, p)
    assert isinstance(res, pt.Inside)
    mat = dv.b_matrix_cached(chsh)
    recon = [
        sum(w * int(mat[lam, k]) for lam, w in enumerate(res.weights))
        for k in range(chsh.n_k)
    ]
    assert recon == p


def test_pr_box_oracle_then_engine(chsh):
    p = pr_box(chsh)
    # Independent oracle: the explicit four-cell inequality scores >= 0 on
    # every assignment and -1/2 on this box.
    f = [0] * 16
    f[chsh.k_index(((0, 0), (0, 0)))] = -1
    f[chsh.k_index(((0, 0), (1, 1)))] = 1
    f[chsh.k_index(((1, 1), (0, 0)))] = 1
    f[chsh.k_index(((1, 0), (1, 0)))] = 1
    assert all(brute_score(chsh, f, a) >= 0 for a in chsh.enumerate_assignments())
    assert sum(fi * pi for fi, pi in zip(f, p)) == Fraction(-1, 2)

    res = pt.decide_membership(chsh, p)
    assert isinstance(res, pt.Outside)
    assert res.violation == Fraction(-1, 2)
    cert = res.certificate
    assert cert.lower == 0 and cert.certified
    assert all(brute_score(chsh, cert.components, a) >= 0 for a in chsh.enumerate_assignments())


def test_membership_notes_report_defects(chsh):
    p = pr_box(chsh)
    q = [v for v in p]
    q[0] += Fraction(1, 7)
    res = pt.decide_membership(chsh, q)
    assert any("signaling" in n for n in res.notes) or any(
        "total" in n for n in res.notes
    )


def test_signaling_input_still_gets_sound_certificate(chsh):
    q = [Fraction(0)] * 16
    q[0] = Fraction(4)  # grossly signaling; its no-signaling content is outside
    res = pt.decide_membership(chsh, q)
    assert isinstance(res, pt.Outside)
    assert res.violation < 0
    assert any("no-signaling content" in n for n in res.notes)
    # the certificate separates the raw input even though it was decided
    # on the span part
    assert sum(f * v for f, v in zip(res.certificate.components, q)) == res.violation


# -- face machinery ----------------------------------------------------------------


def test_face_test_wrong_size(chsh):
    with pytest.raises(ScenarioError):
        pt.face_test(chsh, (0, 1, 2))


def test_face_verdicts_partition(chsh):
    fam = pt.enumerate_facets(chsh)
    assert fam.n_subsets == math.comb(16, 8) == 12870
    assert fam.n_faces + fam.n_interior + fam.n_degenerate == fam.n_subsets
    # frozen regression counts for this scenario
    assert (fam.n_faces, fam.n_interior, fam.n_degenerate) == (3080, 992, 8798)
    assert len(fam.classes) == 24
    assert len(fam.trivial) == 16
    assert len(fam.nontrivial) == 8


def test_single_candidates_agree_with_scan(chsh):
    fam = pt.enumerate_facets(chsh)
    cand = pt.face_test(chsh, fam.nontrivial[0].subset)
    assert cand.verdict == "face"
    g = pt.extract_farkas(chsh, cand)
    assert g.lower == 0
    assert ns.canonicalize(chsh, g.components) == fam.nontrivial[0].canonical


def test_extracted_vector_scores_zero_on_subset(chsh):
    fam = pt.enumerate_facets(chsh)
    for cls in fam.classes[:6]:
        sc = fk.scores(chsh, cls.vector.components)
        assert all(sc[lam] == 0 for lam in cls.subset)
        assert min(sc) == 0 and max(sc) > 0


def test_nontrivial_family_equals_generated_family(chsh):
    fam = pt.enumerate_facets(chsh)
    generated = {ns.canonicalize(chsh, v.components) for v in fk.enumerate_ch(chsh)}
    assert {c.canonical for c in fam.nontrivial} == generated


def test_single_sector_scenario_has_no_nontrivial_facets():
    s = sm.make_scenario([3], [3])
    fam = pt.enumerate_facets(s)
    assert fam.nontrivial == ()
    assert len(fam.trivial) > 0


def test_shard_union_reproduces_scan(chsh):
    full = pt.enumerate_facets(chsh)
    union = set()
    for i in range(3):
        part = pt.enumerate_facets(chsh, shard=(i, 3))
        union |= {c.canonical for c in part.classes}
    assert union == {c.canonical for c in full.classes}


def test_budget_guard(chsh):
    with pytest.raises(ScenarioError):
        pt.enumerate_facets(chsh, budget=100)
    # sharding brings the per-run cost under budget
    fam = pt.enumerate_facets(chsh, budget=5000, shard=(0, 4))
    assert fam.n_subsets == len(range(0, 12870, 4))


def test_facet_functionals_ignore_null_shifts(chsh):
    # Extracted representatives are orthogonal to the null span, so their
    # verdict on any probability vector is unchanged by null shifts.
    fam = pt.enumerate_facets(chsh)
    rng = random.Random(8)
    vectors = ns.enumerate_null_vectors(chsh)
    p = pr_box(chsh)
    shifted = list(p)
    for _ in range(3):
        z = vectors[rng.randrange(len(vectors))]
        c = Fraction(rng.randint(-2, 2), 3)
        shifted = [v + c * w for v, w in zip(shifted, z.components)]
    for cls in fam.classes:
        lhs = sum(f * v for f, v in zip(cls.vector.components, p))
        rhs = sum(f * v for f, v in zip(cls.vector.components, shifted))
        assert lhs == rhs


def test_trivial_class_detector(chsh):
    e0 = [0] * 16
    e0[0] = 1
    assert pt.class_has_nonnegative_member(chsh, e0)
    ch = next(fk.enumerate_ch(chsh))
    assert not pt.class_has_nonnegative_member(chsh, list(ch.components))


def test_membership_agrees_with_facet_oracle_sample(chsh):
    # Smaller copy of the acceptance corpus: engine verdict vs facet
    # separation.  The class representatives are orthogonal to the null
    # span, so their sign pattern decides membership of the no-signaling
    # content, which is exactly what the engine answers.
    fam = pt.enumerate_facets(chsh)
    rng = random.Random(23)
    for trial in range(120):
        kind = trial % 3
        if kind == 0:
            p = random_vertex_mixture(chsh, rng)
        elif kind == 1:
            p = random_vertex_mixture(chsh, rng)
            cell = rng.randrange(16)
            p[cell] += Fraction(1, rng.randint(5, 40))
        else:
            base = pr_box(chsh)
            mix = Fraction(rng.randint(0, 10), 10)
            q = random_vertex_mixture(chsh, rng)
            p = [mix * a + (1 - mix) * b for a, b in zip(base, q)]
        res = pt.decide_membership(chsh, p)
        separated = any(
            sum(f * v for f, v in zip(cls.vector.components, p)) < 0
            for cls in fam.classes
        )
        assert separated != isinstance(res, pt.Inside)
