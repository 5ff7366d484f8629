import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from bellcone import farkas as fk, polytope as pt, quantum as qm, scenario as sm
from bellcone.scenario import ScenarioError

TARGET_OPTIMUM = (1 - math.sqrt(2)) / 2


def ch_fig4(s):
    return fk.generate_ch(
        s,
        fk.ChPartitionSpec(
            obs_a=0, obs_b=1,
            neg_setting_a=0, neg_setting_b=0, pos_setting_a=1, pos_setting_b=1,
            part_neg_a=(0,), part_pos_a=(0,), part_neg_b=(0,), part_pos_b=(0,),
        ),
    )


def singlet_optimal_setup(s):
    """Analyzer angles 0/45 and 22.5/67.5 degrees; the negative block sits
    on the second outcome of the second observer's first setting."""
    model = qm.rotation_model(
        s, [[0.0, math.pi / 4], [math.pi / 8, 3 * math.pi / 8]]
    )
    fv = fk.generate_ch(
        s,
        fk.ChPartitionSpec(
            obs_a=0, obs_b=1,
            neg_setting_a=0, neg_setting_b=0, pos_setting_a=1, pos_setting_b=1,
            part_neg_a=(0,), part_pos_a=(0,), part_neg_b=(1,), part_pos_b=(0,),
        ),
    )
    return model, fv


def random_density(rng, dim):
    a = np.array(
        [[complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(dim)] for _ in range(dim)]
    )
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_qubit_product_mixture(rng, n_terms=3):
    terms = []
    weights = [rng.random() for _ in range(n_terms)]
    total = sum(weights)
    for w in weights:
        left = qm.QuantumState(random_density(rng, 2), (2,))
        right = qm.QuantumState(random_density(rng, 2), (2,))
        terms.append((w / total, qm.tensor(left, right)))
    return qm.mixture(terms)


def random_rotation_model(rng, s):
    return qm.rotation_model(
        s,
        [
            [rng.uniform(0, math.pi) for _ in range(obs.n_settings)]
            for obs in s.observers
        ],
    )


# -- states and models -------------------------------------------------------------


def test_state_validation_rejects_bad_matrices():
    with pytest.raises(ScenarioError):
        qm.QuantumState(np.array([[1, 1], [0, 0]], dtype=complex), (2,))  # not Hermitian
    with pytest.raises(ScenarioError):
        qm.QuantumState(np.eye(2, dtype=complex), (2,))  # trace 2
    bad = np.diag([1.5, -0.5]).astype(complex)
    with pytest.raises(ScenarioError):
        qm.QuantumState(bad, (2,))  # negative eigenvalue


def test_model_validation(chsh):
    good = qm.rotation_model(chsh, [[0.0, 1.0], [0.5, 2.0]])
    good.check_scenario(chsh)
    not_projector = np.array([[0.5, 0.5], [0.5, 0.6]])
    with pytest.raises(ScenarioError):
        qm.MeasurementModel(
            ((
                (not_projector, np.eye(2) - not_projector),
                (np.eye(2), np.zeros((2, 2))),
            ),) * 2,
            (2, 2),
        )


def test_born_probabilities_product_state_factorizes(chsh):
    rng = random.Random(31)
    left = qm.QuantumState(random_density(rng, 2), (2,))
    right = qm.QuantumState(random_density(rng, 2), (2,))
    state = qm.tensor(left, right)
    model = random_rotation_model(rng, chsh)
    probs = qm.born_probabilities(state, model, chsh)
    for k in range(chsh.n_k):
        (sa, xa), (sb, xb) = chsh.coincidence_at(k)
        pa = float(np.real(np.trace(left.rho @ model.projectors[0][sa][xa])))
        pb = float(np.real(np.trace(right.rho @ model.projectors[1][sb][xb])))
        assert probs[k] == pytest.approx(pa * pb, abs=1e-12)


def test_born_probabilities_normalization_and_marginals(chsh):
    rng = random.Random(37)
    state = qm.QuantumState(random_density(rng, 4), (2, 2))
    model = random_rotation_model(rng, chsh)
    probs = qm.born_probabilities(state, model, chsh)
    assert sum(probs) == pytest.approx(chsh.n_t, abs=1e-10)
    from bellcone import nullspace as ns

    for z, _ in ns.no_signaling_defect(chsh, [Fraction(0)] * 16):
        residual = sum(z.components[k] * probs[k] for k in range(16))
        assert abs(residual) < 1e-8


def test_singlet_same_angle_anticorrelation(chsh):
    model = qm.rotation_model(chsh, [[0.3, 1.1], [0.3, 2.0]])
    probs = qm.born_probabilities(qm.singlet(), model, chsh)
    same = chsh.k_index(((0, 0), (0, 0)))
    assert probs[same] == pytest.approx(0.0, abs=1e-12)
    both_one = chsh.k_index(((0, 1), (0, 1)))
    assert probs[both_one] == pytest.approx(0.0, abs=1e-12)


def test_singlet_ch_value_hits_quantum_optimum(chsh):
    model, fv = singlet_optimal_setup(chsh)
    value = qm.bell_value(qm.singlet(), model, chsh, fv)
    assert value == pytest.approx(TARGET_OPTIMUM, abs=1e-12)


def test_singlet_outside_after_rationalization(chsh):
    model, fv = singlet_optimal_setup(chsh)
    probs = qm.born_probabilities(qm.singlet(), model, chsh)
    p = pt.ingest_probabilities(chsh, probs)
    res = pt.decide_membership(chsh, p)
    assert isinstance(res, pt.Outside)


# -- partial transposition ----------------------------------------------------------


def test_partial_transpose_involution_and_full_transpose(chsh):
    rng = random.Random(41)
    state = qm.QuantumState(random_density(rng, 4), (2, 2))
    sigma = qm.partial_transpose(state, 1)
    assert np.allclose(qm.partial_transpose(sigma, 1, dims=(2, 2)), state.rho)
    full = qm.partial_transpose(state, (0, 1))
    assert np.allclose(full, state.rho.T)
    # trace and hermiticity preserved
    assert np.trace(sigma) == pytest.approx(1.0)
    assert np.allclose(sigma, sigma.conj().T)


def test_partial_transpose_matches_index_rule():
    rng = random.Random(43)
    state = qm.QuantumState(random_density(rng, 6), (2, 3))
    sigma = qm.partial_transpose(state, 1)
    rho = state.rho.reshape(2, 3, 2, 3)
    sig = sigma.reshape(2, 3, 2, 3)
    for m, mu, n, nu in itertools.product(range(2), range(3), range(2), range(3)):
        assert sig[m, mu, n, nu] == pytest.approx(rho[m, nu, n, mu])


def test_separable_states_stay_positive_under_transpose():
    rng = random.Random(47)
    for _ in range(5):
        state = random_qubit_product_mixture(rng)
        sigma = qm.partial_transpose(state, 1)
        assert np.linalg.eigvalsh(sigma).min() >= -1e-9


def test_singlet_partial_transpose_eigenvalue():
    sigma = qm.partial_transpose(qm.singlet(), 1)
    assert np.linalg.eigvalsh(sigma).min() == pytest.approx(-0.5, abs=1e-12)
    report = qm.ppt_test(qm.singlet())
    assert report.verdict == "NPT"
    assert min(low for _, low in report.min_eigenvalues) == pytest.approx(-0.5, abs=1e-9)


def test_werner_family_threshold():
    assert qm.ppt_test(qm.werner(0.25)).verdict == "PPT"
    assert qm.ppt_test(qm.werner(0.30)).verdict == "PPT"
    assert qm.ppt_test(qm.werner(0.40)).verdict == "NPT"
    # the exact boundary of the family sits at visibility 1/3
    sigma = qm.partial_transpose(qm.werner(1 / 3), 1)
    assert np.linalg.eigvalsh(sigma).min() == pytest.approx(0.0, abs=1e-12)


def test_product_state_is_ppt(chsh):
    rng = random.Random(53)
    state = qm.tensor(
        qm.QuantumState(random_density(rng, 2), (2,)),
        qm.QuantumState(random_density(rng, 2), (2,)),
    )
    assert qm.ppt_test(state).verdict == "PPT"


def test_tensor_preserves_trace_and_purity():
    rng = random.Random(59)
    a = qm.QuantumState(random_density(rng, 2), (2,))
    phi = qm.pure_state([1, 0, 0, 1], (2, 2))
    chi = qm.pure_state([0, 1], (2,))
    t = qm.tensor(phi, chi)
    assert np.trace(t.rho) == pytest.approx(1.0)
    assert np.trace(t.rho @ t.rho).real == pytest.approx(1.0, abs=1e-10)
    assert qm.tensor(a, chi).dims == (2, 2)


def test_tensor_of_ppt_states_is_ppt_across_product_cut():
    rng = random.Random(61)
    for _ in range(3):
        rho = random_qubit_product_mixture(rng)
        tau = random_qubit_product_mixture(rng)
        assert qm.ppt_test(rho).verdict == "PPT"
        assert qm.ppt_test(tau).verdict == "PPT"
        joint = qm.tensor(rho, tau)  # dims (2, 2, 2, 2); halves at 1 and 3
        sigma = qm.partial_transpose(joint, (1, 3))
        assert np.linalg.eigvalsh(sigma).min() >= -1e-8


# -- invariance under transposition ---------------------------------------------------


def test_transpose_invariance_singlet(chsh):
    model, fv = singlet_optimal_setup(chsh)
    v1, v2, diff = qm.transpose_invariance_check(qm.singlet(), model, chsh, fv)
    assert v1 == pytest.approx(TARGET_OPTIMUM, abs=1e-9)
    assert abs(diff) < 1e-10


def test_transpose_invariance_random(chsh):
    rng = random.Random(67)
    fv = ch_fig4(chsh)
    for _ in range(20):
        state = qm.QuantumState(random_density(rng, 4), (2, 2))
        model = random_rotation_model(rng, chsh)
        _, _, diff = qm.transpose_invariance_check(state, model, chsh, fv)
        assert abs(diff) < 1e-10


def test_transpose_invariance_real_case_is_identity(chsh):
    rng = random.Random(71)
    real = np.array([[rng.random() for _ in range(4)] for _ in range(4)])
    rho = real @ real.T
    state = qm.QuantumState((rho / np.trace(rho)).astype(complex), (2, 2))
    model = random_rotation_model(rng, chsh)  # planar analyzers are real
    probs = qm.born_probabilities(state, model, chsh)
    sigma = qm.partial_transpose(state, 1)
    state_sigma = qm.QuantumState(sigma, (2, 2))
    probs_sigma = qm.born_probabilities(state_sigma, model, chsh)
    fv = ch_fig4(chsh)
    v_rho = sum(f * p for f, p in zip(fv.components, probs))
    v_sig = sum(f * p for f, p in zip(fv.components, probs_sigma))
    assert v_rho == pytest.approx(v_sig, abs=1e-10)


# -- three-party post-selection -------------------------------------------------------


def test_ghz_postselection_report():
    report = qm.ghz_postselect()
    assert report.success_probability == pytest.approx(0.5, abs=1e-10)
    assert report.fidelity >= 1 - 1e-10
    assert report.wrong_basis_purity == pytest.approx(1.0, abs=1e-10)
    assert report.ch_value == pytest.approx(TARGET_OPTIMUM, abs=1e-6)


def test_pointwise_identity_exhaustive():
    ok, table = qm.pointwise_ch_identity_check()
    assert ok
    assert len(table) == 16
    assert table[(0, 0, 0, 0)] == 0
    assert set(table.values()) <= {0, 1}


# -- separable states are local --------------------------------------------------------


def test_separable_mixtures_decide_inside(chsh):
    rng = random.Random(73)
    for _ in range(4):
        state = random_qubit_product_mixture(rng)
        model = random_rotation_model(rng, chsh)
        probs = qm.born_probabilities(state, model, chsh)
        p = pt.ingest_probabilities(chsh, probs)
        res = pt.decide_membership(chsh, p)
        assert isinstance(res, pt.Inside)


# -- file formats -----------------------------------------------------------------------


def test_state_file_roundtrip():
    state = qm.werner(0.7)
    parsed = qm.parse_state(qm.format_state(state))
    assert parsed.dims == state.dims
    assert np.allclose(parsed.rho, state.rho)


def test_model_file_roundtrip(chsh):
    model = qm.rotation_model(chsh, [[0.0, 0.7], [0.4, 1.9]])
    parsed = qm.parse_model(qm.format_model(model))
    assert parsed.dims == model.dims
    for a_settings, b_settings in zip(model.projectors, parsed.projectors):
        for a_projs, b_projs in zip(a_settings, b_settings):
            for a, b in zip(a_projs, b_projs):
                assert np.allclose(a, b)


def test_state_file_errors():
    with pytest.raises(ScenarioError):
        qm.parse_state("state 2\n1 0 0 0\n")  # wrong count
    with pytest.raises(ScenarioError):
        qm.parse_state("notstate 2\n")
