import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from dvqe.mitigation import ReadoutNoise
from dvqe.simulator import (
    Circuit,
    Entangler,
    Rotation,
    StateVector,
    ancilla_zero_probability,
    append_ancilla,
    apply_circuit,
    run_circuit,
    sample_bitstrings,
    sample_counts,
    zero_state,
)

from conftest import random_circuit, random_state, ref_circuit_unitary


class TestCircuitValidation:
    def test_parameter_used_twice(self):
        with pytest.raises(ValueError, match="twice"):
            Circuit(1, (Rotation("Y", 0, 0), Rotation("X", 0, 0)), 1)

    def test_parameter_never_used(self):
        with pytest.raises(ValueError, match="never referenced"):
            Circuit(1, (Rotation("Y", 0, 0),), 2)

    def test_entangler_same_qubit(self):
        with pytest.raises(ValueError):
            Entangler(1, 1)

    def test_qubit_out_of_range(self):
        with pytest.raises(ValueError):
            Circuit(1, (Rotation("Y", 1, 0),), 1)


class TestRunCircuit:
    def test_empty_circuit_is_identity(self):
        out = run_circuit(Circuit(3, (), 0), [])
        assert out.amplitudes == approx(zero_state(3).amplitudes)

    def test_half_turn_y_flips(self):
        circuit = Circuit(1, (Rotation("Y", 0, 0),), 1)
        out = run_circuit(circuit, [np.pi])
        assert np.abs(out.amplitudes) == approx([0.0, 1.0], abs=1e-12)

    def test_parameter_length_checked(self):
        circuit = Circuit(1, (Rotation("Y", 0, 0),), 1)
        with pytest.raises(ValueError):
            run_circuit(circuit, [0.1, 0.2])

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_dense_unitary_product(self, seed):
        qubits = 3 if seed % 2 else 4
        circuit, params = random_circuit(seed, qubits, gate_count=15)
        expected = ref_circuit_unitary(circuit, params)[:, 0]
        out = run_circuit(circuit, params)
        assert out.amplitudes == approx(expected, abs=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_apply_circuit_on_arbitrary_state(self, seed):
        circuit, params = random_circuit(seed + 20, 3, gate_count=10)
        psi = random_state(seed, 3)
        expected = ref_circuit_unitary(circuit, params) @ psi
        out = apply_circuit(circuit, params, StateVector(3, psi))
        assert out.amplitudes == approx(expected, abs=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_norm_preserved(self, seed):
        circuit, params = random_circuit(seed, 3, gate_count=12)
        out = run_circuit(circuit, params)
        assert out.norm() == approx(1.0, abs=1e-10)


class TestAncilla:
    def test_zero_state(self):
        assert ancilla_zero_probability(zero_state(3), 2) == approx(1.0)

    def test_uniform_superposition(self):
        state = StateVector(2, np.full(4, 0.5))
        assert ancilla_zero_probability(state, 1) == approx(0.5)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            ancilla_zero_probability(zero_state(2), 2)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("qubit", [0, 1, 2])
    def test_matches_dense_projector(self, seed, qubit):
        psi = random_state(seed, 3)
        # dense projector onto the qubit's |0> subspace
        p0 = np.zeros((8, 8))
        for i in range(8):
            if format(i, "03b")[qubit] == "0":
                p0[i, i] = 1.0
        expected = (psi.conj() @ p0 @ psi).real
        assert ancilla_zero_probability(StateVector(3, psi), qubit) == approx(
            expected, abs=1e-12
        )

    @pytest.mark.parametrize("seed", range(5))
    def test_zero_plus_one_is_unity(self, seed):
        psi = random_state(seed + 30, 3)
        p0 = ancilla_zero_probability(StateVector(3, psi), 1)
        p1 = sum(abs(a) ** 2 for i, a in enumerate(psi) if format(i, "03b")[1] == "1")
        assert p0 + p1 == approx(1.0, abs=1e-12)

    def test_append_ancilla_layout(self):
        psi = random_state(3, 2)
        grown = append_ancilla(StateVector(2, psi))
        assert grown.qubit_count == 3
        assert grown.amplitudes[0::2] == approx(psi)
        assert grown.amplitudes[1::2] == approx(np.zeros(4))
        assert ancilla_zero_probability(grown, 2) == approx(1.0)


class TestSampling:
    def test_deterministic_state(self):
        state = StateVector(1, [0, 1])
        hist = sample_bitstrings(state, 100, rng_seed=0)
        assert hist.counts == {"1": 100}
        assert hist.shots == 100

    def test_plus_state_within_binomial_bound(self):
        state = StateVector(1, np.array([1, 1]) / np.sqrt(2))
        shots = 100_000
        hist = sample_bitstrings(state, shots, rng_seed=1)
        sigma = np.sqrt(shots * 0.25)
        assert abs(hist.counts["0"] - shots / 2) < 5 * sigma

    def test_readout_noise_flips_within_bound(self):
        shots = 100_000
        noise = ReadoutNoise.uniform(1, 0.02)
        hist = sample_bitstrings(zero_state(1), shots, noise=noise, rng_seed=2)
        sigma = np.sqrt(shots * 0.02 * 0.98)
        assert abs(hist.counts.get("1", 0) - 0.02 * shots) < 5 * sigma

    def test_seed_reproducibility(self):
        state = StateVector(2, random_state(8, 2))
        a = sample_counts(state, 1000, rng_seed=7)
        b = sample_counts(state, 1000, rng_seed=7)
        assert (a == b).all()

    def test_histogram_totals(self):
        state = StateVector(2, random_state(9, 2))
        hist = sample_bitstrings(state, 123, rng_seed=0)
        assert sum(hist.counts.values()) == 123
        assert hist.to_vector(2).sum() == 123
