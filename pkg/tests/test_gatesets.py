import numpy as np
import pytest

from mbqcrb.channels import H, I2, P, Unitary2, X, Z, frame_potential, avg_gate_fidelity, twirl, random_cptp_channel, amplitude_damping
from mbqcrb.gatesets import (
    CLIFFORD_ANGLE_TABLE,
    VerificationError,
    angles_to_clifford,
    byproduct_bits,
    clifford_group,
    clifford_index,
    coset_reps,
    derandomized_design,
    element_from_outcomes,
    outcome_index,
    pauli_group,
    verify_2design,
    verify_angle_table,
    verify_byproduct_bits,
    verify_design_reference,
    word_to_unitary,
)
from mbqcrb.wire import step_unitary

HALF_PI = np.pi / 2


class TestCliffordGroup:
    def test_size(self):
        assert len(clifford_group()) == 24

    def test_contains_named_gates(self):
        mats = [e.unitary for e in clifford_group()]
        for target in (I2, P, H):
            assert any(u.equals_up_to_phase(target) for u in mats)

    def test_words_match_unitaries(self):
        for e in clifford_group():
            assert e.unitary.equals_up_to_phase(word_to_unitary(e.word))

    def test_pairwise_distinct(self):
        group = clifford_group()
        for i in range(24):
            for j in range(i + 1, 24):
                assert not group[i].unitary.equals_up_to_phase(group[j].unitary)

    def test_product_closure(self):
        group = clifford_group()
        for a in group:
            for b in group:
                clifford_index(a.unitary @ b.unitary)  # raises if not in group

    def test_inverse_closure(self):
        for e in clifford_group():
            clifford_index(e.unitary.dagger())

    def test_angles_are_quarter_turns(self):
        for e in clifford_group():
            for theta in e.angles:
                assert abs(theta / HALF_PI - round(theta / HALF_PI)) < 1e-12

    def test_clifford_index_rejects_outsiders(self):
        from mbqcrb.channels import z_rotation

        with pytest.raises(ValueError):
            clifford_index(z_rotation(0.3))


class TestCosetReps:
    def test_size_and_identity(self):
        reps = coset_reps()
        assert len(reps) == 6
        assert reps[0].unitary.equals_up_to_phase(I2)
        assert [e.word for e in reps] == ["I", "P", "H", "PH", "HP", "PHP"]

    def test_pauli_cosets_partition_group(self):
        # {I, X, Y, Z} x T1 must hit each of the 24 elements exactly once
        hits = []
        for w in pauli_group():
            for g in coset_reps():
                hits.append(clifford_index(Unitary2(w.matrix @ g.unitary.matrix)))
        assert sorted(hits) == list(range(24))


class TestAnglesToClifford:
    def test_table_row_h(self):
        assert angles_to_clifford((0.0, 0.0, 0.0)).equals_up_to_phase(H)

    def test_table_row_i(self):
        assert angles_to_clifford((HALF_PI, HALF_PI, HALF_PI)).equals_up_to_phase(I2)

    def test_table_row_p(self):
        assert angles_to_clifford((0.0, 3 * HALF_PI, 3 * HALF_PI)).equals_up_to_phase(P)

    def test_table_row_p2_is_z(self):
        # squaring diag(1, i) gives diag(1, -1)
        assert (P @ P).equals_up_to_phase(Z)
        assert angles_to_clifford((HALF_PI, 3 * HALF_PI, 3 * HALF_PI)).equals_up_to_phase(Z)

    def test_rejects_non_quarter_turn(self):
        with pytest.raises(ValueError):
            angles_to_clifford((0.3, 0.0, 0.0))


class TestAngleTable:
    def test_all_rows_pass(self):
        devs = verify_angle_table()
        assert len(devs) == 24
        assert max(devs.values()) < 1e-10

    def test_corrupted_row_names_offender(self):
        table = dict(CLIFFORD_ANGLE_TABLE)
        table["H"] = (0, 0, 1)
        with pytest.raises(VerificationError, match="H"):
            verify_angle_table(table)


class TestByproductBits:
    def test_zero_outcomes_no_correction(self):
        for n1 in range(4):
            for n2 in range(4):
                for n3 in range(4):
                    assert byproduct_bits((n1, n2, n3), (0, 0, 0)) == (0, 0)

    def test_first_outcome_all_zero_turns(self):
        assert byproduct_bits((0, 0, 0), (1, 0, 0)) == (1, 0)

    def test_brute_force_all_512(self):
        # matrix-product oracle over every quarter-turn/outcome combination
        worst = 0.0
        for n1 in range(4):
            for n2 in range(4):
                for n3 in range(4):
                    n = (n1, n2, n3)
                    base = angles_to_clifford(tuple(k * HALF_PI for k in n))
                    for m_int in range(8):
                        m = ((m_int >> 2) & 1, (m_int >> 1) & 1, m_int & 1)
                        realized = np.eye(2, dtype=complex)
                        for nk, mk in zip(n, m):
                            realized = step_unitary(nk * HALF_PI, mk).matrix @ realized
                        b1, b2 = byproduct_bits(n, m)
                        predicted = base.matrix
                        if b2:
                            predicted = Z.matrix @ predicted
                        if b1:
                            predicted = X.matrix @ predicted
                        dev = Unitary2(realized).phase_distance(Unitary2(predicted))
                        worst = max(worst, dev)
        assert worst < 1e-10

    def test_verify_helper_agrees(self):
        assert verify_byproduct_bits() < 1e-10

    def test_input_validation(self):
        with pytest.raises(ValueError):
            byproduct_bits((4, 0, 0), (0, 0, 0))
        with pytest.raises(ValueError):
            byproduct_bits((0, 0, 0), (2, 0, 0))


class TestDerandomizedDesign:
    def test_angles(self):
        d = derandomized_design()
        assert d.angles[0] == 0.0
        assert d.angles[1] == pytest.approx(np.pi / 4)
        assert d.angles[2] == pytest.approx(np.arccos(1 / np.sqrt(3)))
        assert d.angles[4] == 0.0

    def test_zero_phi_flip_matrices(self):
        d = derandomized_design()
        assert d.a[3].equals_up_to_phase(Z)
        assert d.a[4].equals_up_to_phase(X)
        a3 = np.array([[0, np.exp(-1j * np.pi / 4)], [np.exp(1j * np.pi / 4), 0]])
        assert np.allclose(d.a[2].matrix, a3, atol=1e-12)
        assert d.a[0].matrix[0, 0] == pytest.approx(1 / np.sqrt(3), abs=1e-12)

    def test_reference_matrices_entrywise(self):
        devs = verify_design_reference()
        assert max(devs.values()) < 1e-10

    def test_flips_are_pi_rotations(self):
        for phis in ((0.0, 0.0), (0.4, -1.2)):
            d = derandomized_design(*phis)
            for a in d.a:
                m = a.matrix
                assert abs(np.trace(m)) < 1e-10
                assert np.allclose(m, m.conj().T, atol=1e-10)
                assert (a @ a).equals_up_to_phase(I2)

    def test_element_lookup_identities(self):
        d = derandomized_design()
        assert element_from_outcomes(d, (0, 0, 0, 0, 0)).equals_up_to_phase(d.q_gate)
        a1q = Unitary2(d.a[0].matrix @ d.q_gate.matrix)
        assert element_from_outcomes(d, (1, 0, 0, 0, 0)).equals_up_to_phase(a1q)

    def test_elements_match_direct_product(self):
        # oracle: chain the 5 raw measurement gates X^m H Z_theta directly
        for phis in ((0.0, 0.0), (0.9, 0.2)):
            d = derandomized_design(*phis)
            for idx in range(32):
                bits = tuple((idx >> (4 - k)) & 1 for k in range(5))
                direct = np.eye(2, dtype=complex)
                for theta, m in zip(d.angles, bits):
                    direct = step_unitary(theta, m).matrix @ direct
                assert element_from_outcomes(d, bits).equals_up_to_phase(
                    Unitary2(direct)
                ), (phis, bits)

    def test_elements_distinct(self):
        d = derandomized_design()
        for i in range(32):
            for j in range(i + 1, 32):
                assert not d.elements[i].equals_up_to_phase(d.elements[j])

    def test_outcome_index(self):
        assert outcome_index((0, 0, 0, 0, 0)) == 0
        assert outcome_index((1, 0, 0, 0, 0)) == 16
        assert outcome_index((0, 0, 0, 0, 1)) == 1
        with pytest.raises(ValueError):
            outcome_index((1, 0, 0))

    def test_rejects_non_finite_phis(self):
        with pytest.raises(ValueError):
            derandomized_design(np.nan, 0.0)


class TestVerify2Design:
    def test_clifford_passes(self):
        assert verify_2design([e.unitary for e in clifford_group()], 1e-9)

    def test_derandomized_passes(self):
        assert verify_2design(list(derandomized_design().elements), 1e-9)

    def test_nonzero_phis_still_pass(self):
        for phis in ((0.3, -0.7), (1.1, 0.4), (0.05, 2.2)):
            assert verify_2design(list(derandomized_design(*phis).elements), 1e-8)

    def test_pauli_fails(self):
        assert not verify_2design(list(pauli_group()), 1e-9)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            verify_2design([], 1e-9)

    def test_design_frame_potential(self):
        assert frame_potential(list(derandomized_design().elements), 2) == pytest.approx(
            2.0, abs=1e-9
        )

    def test_design_twirl_matches_fidelity(self, rng):
        gates = list(derandomized_design().elements)
        for _ in range(5):
            ch = random_cptp_channel(rng)
            tw = twirl(ch, gates).ptm
            p = np.trace(tw[1:, 1:]) / 3
            assert np.max(np.abs(tw - np.diag([1, p, p, p]))) < 1e-9
            assert (1 + p) / 2 == pytest.approx(
                avg_gate_fidelity(ch, I2), abs=1e-9
            )

    def test_amplitude_damping_twirl_examples(self):
        tw = twirl(amplitude_damping(0.1), [e.unitary for e in clifford_group()]).ptm
        off = tw - np.diag(np.diagonal(tw))
        assert np.max(np.abs(off)) < 1e-10
