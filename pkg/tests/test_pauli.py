import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from dvqe.mitigation import ReadoutNoise
from dvqe.pauli import (
    PauliParseError,
    PauliSum,
    PauliTerm,
    dense_matrix,
    expectation_exact,
    expectation_sampled,
    parse_pauli_sum,
)
from dvqe.simulator import StateVector

from conftest import random_pauli_sum, random_state, ref_hamiltonian_matrix


class TestParse:
    def test_single_term(self):
        h = parse_pauli_sum("1.0 ZZ")
        assert h.qubit_count == 2
        assert h.terms == (PauliTerm(1.0, "ZZ"),)

    def test_multi_line_with_signs(self):
        h = parse_pauli_sum("0.5 ZI\n-0.5 IZ")
        assert h.qubit_count == 2
        assert [t.coefficient for t in h.terms] == [0.5, -0.5]

    def test_comments_and_blank_lines(self):
        h = parse_pauli_sum("# header\n\n1.0 XX  # inline\n\n-2.0 YY\n")
        assert len(h.terms) == 2

    def test_length_mismatch_rejected(self):
        with pytest.raises(PauliParseError) as err:
            parse_pauli_sum("1.0 ZZZ\n1.0 ZZ")
        assert err.value.line == 2

    def test_malformed_coefficient(self):
        with pytest.raises(PauliParseError) as err:
            parse_pauli_sum("one Z")
        assert "one" in str(err.value)
        assert err.value.line == 1

    def test_illegal_axis(self):
        with pytest.raises(PauliParseError):
            parse_pauli_sum("1.0 ZQ")

    def test_empty_document(self):
        with pytest.raises(PauliParseError):
            parse_pauli_sum("# nothing here\n")

    def test_roundtrip(self):
        h = random_pauli_sum(3, 3)
        assert parse_pauli_sum(h.to_text()) == h


class TestDenseMatrix:
    def test_z(self):
        m = dense_matrix(PauliSum(1, (PauliTerm(1.0, "Z"),)))
        assert m == approx(np.diag([1.0, -1.0]))

    def test_x(self):
        m = dense_matrix(PauliSum(1, (PauliTerm(1.0, "X"),)))
        assert m == approx(np.array([[0, 1], [1, 0]], dtype=complex))

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_entrywise_reference(self, seed):
        h = random_pauli_sum(seed, 3)
        ref = ref_hamiltonian_matrix(h)
        assert dense_matrix(h) == approx(ref, abs=1e-12)
        assert np.linalg.eigvalsh(dense_matrix(h)) == approx(np.linalg.eigvalsh(ref))

    def test_guard(self):
        h = PauliSum(13, (PauliTerm(1.0, "I" * 13),))
        with pytest.raises(ValueError, match="guard"):
            dense_matrix(h)


class TestExpectationExact:
    def test_zz_on_zero_state(self):
        state = StateVector(2, [1, 0, 0, 0])
        assert expectation_exact(state, parse_pauli_sum("1.0 ZZ")) == approx(1.0)

    def test_xi_on_zero_state(self):
        state = StateVector(2, [1, 0, 0, 0])
        assert expectation_exact(state, parse_pauli_sum("1.0 XI")) == approx(0.0)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_dense_quadratic_form(self, seed):
        h = random_pauli_sum(seed, 2)
        psi = random_state(seed + 100, 2)
        expected = (psi.conj() @ dense_matrix(h) @ psi).real
        assert expectation_exact(StateVector(2, psi), h) == approx(expected, abs=1e-10)

    @pytest.mark.parametrize("qubits", [1, 2, 3, 4, 5])
    def test_realness_and_dense_agreement(self, qubits):
        h = random_pauli_sum(qubits, qubits)
        psi = random_state(qubits + 50, qubits)
        dense_value = psi.conj() @ dense_matrix(h) @ psi
        assert abs(dense_value.imag) < 1e-12
        assert expectation_exact(StateVector(qubits, psi), h) == approx(
            dense_value.real, abs=1e-10
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            expectation_exact(StateVector(1, [1, 0]), parse_pauli_sum("1.0 ZZ"))


class TestExpectationSampled:
    def test_zero_variance_outcome(self):
        state = StateVector(2, [1, 0, 0, 0])
        h = parse_pauli_sum("1.0 ZZ")
        for shots in (1, 7, 100):
            assert expectation_sampled(state, h, shots, rng_seed=0) == approx(1.0)

    def test_identity_term_exact_with_no_shots(self):
        state = StateVector(2, random_state(0, 2))
        h = parse_pauli_sum("0.75 II")
        assert expectation_sampled(state, h, 1, rng_seed=0) == approx(0.75)

    def test_reproducible_for_fixed_seed(self):
        h = random_pauli_sum(4, 2)
        state = StateVector(2, random_state(5, 2))
        a = expectation_sampled(state, h, 500, rng_seed=42)
        b = expectation_sampled(state, h, 500, rng_seed=42)
        assert a == b

    def test_converges_to_exact(self):
        # mean over many seeds approaches the exact value within 3 standard errors
        h = random_pauli_sum(6, 2)
        state = StateVector(2, random_state(7, 2))
        exact = expectation_exact(state, h)
        shots = 8000
        estimates = np.array(
            [expectation_sampled(state, h, shots, rng_seed=s) for s in range(100)]
        )
        stderr = estimates.std(ddof=1) / np.sqrt(len(estimates))
        assert abs(estimates.mean() - exact) < 3 * max(stderr, 1e-6)

    def test_unbiased_under_basis_change(self):
        # X and Y terms must estimate the same value the exact path gives
        h = parse_pauli_sum("0.7 XY\n-0.3 YX\n0.4 XX")
        state = StateVector(2, random_state(11, 2))
        exact = expectation_exact(state, h)
        estimates = np.array(
            [expectation_sampled(state, h, 4000, rng_seed=s) for s in range(60)]
        )
        stderr = estimates.std(ddof=1) / np.sqrt(len(estimates))
        assert abs(estimates.mean() - exact) < 3 * stderr

    def test_error_within_binomial_bound_at_8000_shots(self):
        h = random_pauli_sum(8, 2)
        state = StateVector(2, random_state(9, 2))
        exact = expectation_exact(state, h)
        # a priori bound: each term's parity estimate has variance <= 1/shots
        sigma = np.sqrt(sum(t.coefficient**2 for t in h.terms) / 8000)
        for seed in range(10):
            est = expectation_sampled(state, h, 8000, rng_seed=seed)
            assert abs(est - exact) < 5 * sigma

    def test_noise_biases_low_mitigation_recovers(self):
        state = StateVector(1, [1, 0])
        h = parse_pauli_sum("1.0 Z")
        noise = ReadoutNoise.uniform(1, 0.1)
        est = expectation_sampled(state, h, 20000, noise=noise, rng_seed=3)
        assert est == approx(0.8, abs=0.05)  # flips shift <Z> from 1 to 1 - 2p


class TestInvariants:
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000), qubits=st.integers(1, 4))
    def test_expectation_real_and_dense_consistent(self, seed, qubits):
        h = random_pauli_sum(seed, qubits, term_count=min(6, 4**qubits - 1))
        psi = random_state(seed, qubits)
        value = expectation_exact(StateVector(qubits, psi), h)
        dense_value = psi.conj() @ dense_matrix(h) @ psi
        assert abs(dense_value.imag) < 1e-12
        assert value == approx(dense_value.real, abs=1e-10)

    def test_term_invariants(self):
        with pytest.raises(ValueError):
            PauliTerm(float("nan"), "Z")
        with pytest.raises(ValueError):
            PauliTerm(1.0, "ZA")
        with pytest.raises(ValueError):
            PauliSum(2, (PauliTerm(1.0, "ZZZ"),))
