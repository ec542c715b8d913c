"""
運動量空間の演算子のテスト
"""

import math
import numpy as np
import pytest
from numpy.testing import assert_allclose

from diracops.algebra import (
    ALPHA,
    BETA,
    I4,
    SPIN,
    Kinematics,
    Representation,
    RepresentationError,
    constant,
    inverse_hamiltonian,
    kinematics,
    plane_wave_bispinor,
)
from diracops.operators import (
    Conjugation,
    SpinOperator,
    berry_connection,
    berry_curvature,
    canonical_oam,
    canonical_position,
    canonical_spin,
    center_of_energy,
    commutator,
    curvature_from_commutators,
    fw_conjugate,
    hamiltonian_operator,
    helicity,
    heisenberg_velocity,
    momentum_multiplication,
    nwfw_oam,
    nwfw_position,
    nwfw_spin,
    pauli_lubanski,
    plane_wave_spin,
    project_operator,
    projected_oam,
    projected_position,
    projected_spin,
    pryce_q,
    relativistic_spin,
    spin_from_pauli_lubanski,
    total_angular_momentum,
)

UP = np.array([1.0, 0.0], dtype=complex)
LONGITUDINAL = kinematics([0, 0, math.sqrt(3)], 1.0)
REST = kinematics([0, 0, 0], 1.0)


def random_kinematics(n=20, seed=11, masses=(0.1, 1.0, 10.0)):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        magnitude = math.exp(rng.uniform(math.log(0.05), math.log(20.0)))
        out.append(Kinematics(magnitude * direction, masses[i % len(masses)]))
    return out


def electron(kin, w=UP):
    return plane_wave_bispinor(kin, w)


class TestCanonicalOperators:
    """正準演算子のテスト"""

    def test_canonical_pair(self):
        """[r_x, p_x] = i"""
        r, p = canonical_position(), momentum_multiplication()
        value = commutator(r[0], p[0], kinematics([0.3, 0.2, 1.0], 1.0))

        assert_allclose(value.matrix, 1j * I4, atol=1e-10)
        assert_allclose(value.coefficients, 0)

    def test_positions_commute(self):
        r = canonical_position()
        assert commutator(r[0], r[1], kinematics([0.3, 0.2, 1.0], 1.0)).norm() == 0

    def test_velocity_is_alpha(self):
        """dr/dt = i[H, r] = α"""
        kin = kinematics([0.3, -1.2, 0.8], 1.0)
        for k, r in enumerate(canonical_position()):
            assert_allclose(heisenberg_velocity(r, kin).matrix, ALPHA[k], atol=1e-9)

    def test_total_angular_momentum_conserved(self):
        hamilton = hamiltonian_operator()
        for kin in random_kinematics():
            for op in total_angular_momentum():
                assert commutator(hamilton, op, kin).norm() < 1e-10 * max(1.0, kin.p_norm)

    def test_spin_and_oam_not_conserved(self):
        """[H, L_z] と [H, S_z] は0でない"""
        kin = kinematics([1, 0, 0], 1.0)
        hamilton = hamiltonian_operator()

        assert commutator(hamilton, canonical_oam()[2], kin).norm() > 0.1
        assert commutator(hamilton, canonical_spin()[2], kin).norm() > 0.1

    def test_spin_operator_rejects_derivative(self):
        with pytest.raises(ValueError, match="derivative"):
            SpinOperator(matrix=constant(SPIN[0]), coefficients=lambda kin: np.ones(3))

    def test_representation_mismatch(self):
        with pytest.raises(RepresentationError):
            canonical_spin()[0] + canonical_spin(Representation.FW)[0]
        with pytest.raises(RepresentationError):
            commutator(canonical_position()[0], canonical_spin(Representation.FW)[1], REST)


class TestProjectedOperators:
    """射影演算子のテスト"""

    def test_position_at_rest(self):
        """p = 0 で 𝓡_x の行列部は iβα_x/2"""
        assert_allclose(projected_position()[0].matrix(REST), 0.5j * BETA @ ALPHA[0], atol=1e-15)
        assert_allclose(projected_position(Representation.FW)[0].matrix(REST), 0, atol=1e-15)

    def test_spin_at_rest(self):
        for k, op in enumerate(projected_spin()):
            assert_allclose(op.matrix(REST), SPIN[k], atol=1e-15)

    def test_longitudinal_spin_unchanged(self):
        """p ∥ z では 𝓢_FW,z = S_z"""
        assert_allclose(projected_spin(Representation.FW)[2].matrix(LONGITUDINAL), SPIN[2], atol=1e-14)

    def test_projection_reproduces_closed_forms(self):
        """Π⁺OΠ⁺ + Π⁻OΠ⁻ と閉形式"""
        for kin in random_kinematics(10):
            for built, closed in [
                (canonical_position(), projected_position()),
                (canonical_spin(), projected_spin()),
                (canonical_oam(), projected_oam()),
            ]:
                for op, reference in zip(built, closed):
                    deviation = project_operator(op).value(kin).deviation(reference.value(kin))
                    assert deviation < 1e-7 * max(1.0, reference.value(kin).norm())

    def test_projection_keeps_p_and_j(self):
        kin = kinematics([0.4, 0.1, -2.0], 1.0)
        for op in list(momentum_multiplication()) + list(total_angular_momentum()):
            assert project_operator(op).value(kin).deviation(op.value(kin)) < 1e-8

    def test_projection_rejects_fw(self):
        with pytest.raises(RepresentationError):
            project_operator(canonical_position(Representation.FW)[0])

    def test_sum_rule(self):
        """𝓛 + 𝓢 = J"""
        for kin in random_kinematics(10, seed=12):
            for S, L, J in zip(projected_spin(), projected_oam(), total_angular_momentum()):
                assert (S + L).value(kin).deviation(J.value(kin)) < 1e-12 * max(1.0, kin.p_norm)

    def test_projected_spin_conserved(self):
        hamilton = hamiltonian_operator()
        for kin in random_kinematics(10, seed=13):
            for op in list(projected_spin()) + list(projected_oam()):
                assert commutator(hamilton, op, kin).norm() < 1e-7 * max(1.0, kin.p_norm)

    def test_projected_velocity(self):
        """d𝓡/dt = p H⁻¹、電子状態で p/E"""
        R = projected_position()
        velocity = heisenberg_velocity(R[2], LONGITUDINAL)

        assert_allclose(velocity.matrix, math.sqrt(3) * inverse_hamiltonian(LONGITUDINAL), atol=1e-8)
        W = electron(LONGITUDINAL)
        assert np.vdot(W, velocity.matrix @ W).real == pytest.approx(math.sqrt(3) / 2, abs=1e-8)

    def test_deformed_spin_algebra(self):
        """[𝓢_x, 𝓢_y] = i(𝓢_z - (p·𝓢)p_z/E²)"""
        for kin in random_kinematics(10, seed=14):
            S = projected_spin()
            spin = np.array([op.matrix(kin) for op in S])
            p_dot = np.einsum("k,kab->ab", kin.p, spin)
            expected = 1j * (spin[2] - p_dot * kin.p[2] / kin.E**2)
            assert_allclose(commutator(S[0], S[1], kin).matrix, expected, atol=1e-12)


class TestFwConjugation:
    """FW共役とNWFW演算子のテスト"""

    def test_hamiltonian_to_fw(self):
        kin = kinematics([0.3, -0.4, 1.2], 2.0)
        fw = fw_conjugate(hamiltonian_operator(), Conjugation.TO_FW)

        assert fw.representation == Representation.FW
        assert_allclose(fw.matrix(kin), kin.E * BETA, atol=1e-12)

    def test_projected_position_to_fw(self):
        for kin in random_kinematics(10, seed=15):
            for op, reference in zip(projected_position(), projected_position(Representation.FW)):
                built = fw_conjugate(op, Conjugation.TO_FW)
                assert built.value(kin).deviation(reference.value(kin)) < 1e-8

    def test_nwfw_position_from_fw(self):
        """from_fw(r) は r̃ の閉形式"""
        for kin in random_kinematics(10, seed=16):
            for op, reference in zip(canonical_position(Representation.FW), nwfw_position()):
                built = fw_conjugate(op, Conjugation.FROM_FW)
                assert built.value(kin).deviation(reference.value(kin)) < 1e-8

    def test_nwfw_position_at_rest(self):
        assert_allclose(nwfw_position()[0].matrix(REST), 0.5j * BETA @ ALPHA[0], atol=1e-15)
        assert_allclose(nwfw_position(Representation.FW)[0].matrix(REST), 0)

    def test_nwfw_spin_canonical_in_fw(self):
        for k, op in enumerate(nwfw_spin(Representation.FW)):
            assert_allclose(op.matrix(LONGITUDINAL), SPIN[k])

    def test_nwfw_sum_rule(self):
        for kin in random_kinematics(10, seed=17):
            for S, L, J in zip(nwfw_spin(), nwfw_oam(), total_angular_momentum()):
                assert (S + L).value(kin).deviation(J.value(kin)) < 1e-12 * max(1.0, kin.p_norm)

    def test_nwfw_canonical_commutators(self):
        """[r̃_x, r̃_y] = 0, [S̃_x, S̃_y] = iS̃_z"""
        for kin in random_kinematics(10, seed=18):
            rt, st = nwfw_position(), nwfw_spin()
            assert commutator(rt[0], rt[1], kin).norm() < 1e-7
            assert_allclose(commutator(st[0], st[1], kin).matrix, 1j * st[2].matrix(kin), atol=1e-12)

    def test_mismatched_direction(self):
        with pytest.raises(RepresentationError, match="to_fw"):
            fw_conjugate(canonical_position(Representation.FW)[0], Conjugation.TO_FW)
        with pytest.raises(RepresentationError, match="from_fw"):
            fw_conjugate(canonical_position()[0], Conjugation.FROM_FW)


class TestBerryCurvature:
    """ベリー接続と曲率のテスト"""

    def test_connection_vanishes_at_rest(self):
        assert_allclose(berry_connection(REST), 0)

    def test_curvature_at_rest(self):
        """p = 0 で F = -S/m²"""
        assert_allclose(berry_curvature(REST), -SPIN, atol=1e-8)

    def test_electron_expectation(self):
        """p ∥ z, w = (1,0) で F_z の電子ブロック期待値 -0.125"""
        F = berry_curvature(LONGITUDINAL)
        fw_electron = np.array([1, 0, 0, 0], dtype=complex)

        assert np.vdot(fw_electron, F[2] @ fw_electron).real == pytest.approx(-0.125, abs=1e-7)

    def test_routes_agree(self):
        for kin in random_kinematics(5, seed=19):
            assert_allclose(curvature_from_commutators(kin), berry_curvature(kin), atol=1e-6)

    def test_curvature_is_projected_spin_over_e2(self):
        for kin in random_kinematics(5, seed=20):
            expected = -np.array([op.matrix(kin) for op in projected_spin(Representation.FW)]) / kin.E**2
            assert_allclose(berry_curvature(kin), expected, atol=1e-7)


class TestPauliLubanski:
    """パウリ・ルバンスキーベクトルのテスト"""

    def test_rest_frame(self):
        pl = pauli_lubanski(REST)

        for k in range(3):
            assert_allclose(pl.space[k], BETA @ SPIN[k], atol=1e-15)
        assert_allclose(spin_from_pauli_lubanski(REST), SPIN, atol=1e-15)

    def test_spin_relation(self):
        """𝓢 = 𝓦 H⁻¹"""
        for kin in random_kinematics(20, seed=21):
            expected = np.array([op.matrix(kin) for op in projected_spin()])
            assert_allclose(spin_from_pauli_lubanski(kin), expected, atol=1e-12)

    def test_time_component(self):
        W = electron(LONGITUDINAL)
        value = np.vdot(W, pauli_lubanski(LONGITUDINAL).time @ W).real

        assert value == pytest.approx(math.sqrt(3) / 2, abs=1e-12)

    def test_invariant(self):
        """W⁰² - 𝓦² = -(3/4)m²"""
        W = electron(LONGITUDINAL)
        invariant = pauli_lubanski(LONGITUDINAL).invariant()

        assert np.vdot(W, invariant @ W).real == pytest.approx(-0.75, abs=1e-10)


class TestCenterOfEnergy:
    """エネルギー中心と Pryce の q のテスト"""

    def test_center_of_energy_matrix(self):
        n = center_of_energy(REST)

        assert_allclose(n.matrices[0], 0.5j * ALPHA[0])
        assert_allclose(n.coefficient_matrix, BETA)

    def test_pryce_q_equals_projected_position(self):
        q, R = pryce_q(), projected_position()
        for kin in random_kinematics(20, seed=22):
            for a, b in zip(q, R):
                assert a.value(kin).deviation(b.value(kin)) < 1e-8 * max(1.0, b.value(kin).norm())


class TestPlaneWaveSpin:
    """平面波のスピン期待値のテスト"""

    def test_closed_form(self):
        rng = np.random.default_rng(23)
        for kin in random_kinematics(100, seed=24, masses=(0.0, 0.1, 1.0, 10.0)):
            w = rng.normal(size=2) + 1j * rng.normal(size=2)
            w /= np.linalg.norm(w)
            assert np.max(np.abs(plane_wave_spin(kin, w) - relativistic_spin(kin, w))) < 1e-12

    def test_transverse_benchmark(self):
        """m = 1, p = 1 横方向で ⟨S_z⟩ = 1/(2√2)"""
        kin = kinematics([1, 0, 0], 1.0)
        assert plane_wave_spin(kin, UP)[2] == pytest.approx(1 / (2 * math.sqrt(2)), abs=1e-12)

    def test_helicity(self):
        assert helicity(LONGITUDINAL, UP) == pytest.approx(0.5, abs=1e-12)
        assert helicity(REST, UP) == 0.0
