"""Dense statevector simulation of parametrized rotation/entangler circuits.

Basis-state indices are big-endian in the qubit number: qubit 0 owns the most
significant bit, so on two qubits index 2 = ``"10"`` means qubit 0 is 1 and
qubit 1 is 0.  Bitstrings everywhere in the package follow this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mitigation import ReadoutNoise, ShotHistogram

__all__ = [
    "StateVector",
    "Rotation",
    "Entangler",
    "Gate",
    "Circuit",
    "zero_state",
    "run_circuit",
    "apply_circuit",
    "append_ancilla",
    "ancilla_zero_probability",
    "sample_bitstrings",
    "sample_counts",
]

ENTANGLER_GATE = "CZ"  # swap in "CNOT" to change the ladder gate globally


@dataclass(frozen=True)
class Rotation:
    """Single-qubit rotation exp(-i * angle * sigma_axis / 2)."""

    axis: str
    qubit: int
    parameter_index: int

    def __post_init__(self):
        if self.axis not in ("X", "Y", "Z"):
            raise ValueError(f"rotation axis must be X, Y or Z, got {self.axis!r}")


@dataclass(frozen=True)
class Entangler:
    """Two-qubit entangling gate between a control and a target qubit."""

    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("entangler control and target must differ")


Gate = Rotation | Entangler


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over a fixed register.

    Every parameter index below ``parameter_count`` must be used by exactly
    one rotation gate, so a parameter vector maps one-to-one onto rotations.
    """

    qubit_count: int
    gates: tuple[Gate, ...]
    parameter_count: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        seen: set[int] = set()
        for g in self.gates:
            if isinstance(g, Rotation):
                if not 0 <= g.qubit < self.qubit_count:
                    raise ValueError(f"rotation qubit {g.qubit} out of range")
                if not 0 <= g.parameter_index < self.parameter_count:
                    raise ValueError(f"parameter index {g.parameter_index} out of range")
                if g.parameter_index in seen:
                    raise ValueError(f"parameter index {g.parameter_index} used twice")
                seen.add(g.parameter_index)
            else:
                for q in (g.control, g.target):
                    if not 0 <= q < self.qubit_count:
                        raise ValueError(f"entangler qubit {q} out of range")
        if len(seen) != self.parameter_count:
            missing = sorted(set(range(self.parameter_count)) - seen)
            raise ValueError(f"parameter indices never referenced: {missing}")


@dataclass
class StateVector:
    """2^n complex amplitudes; treated as immutable once returned by a run."""

    qubit_count: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.qubit_count,):
            raise ValueError(
                f"amplitude vector of length {self.amplitudes.shape} "
                f"for {self.qubit_count} qubits"
            )

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def zero_state(qubit_count: int) -> StateVector:
    amps = np.zeros(2**qubit_count, dtype=complex)
    amps[0] = 1.0
    return StateVector(qubit_count, amps)


@lru_cache(maxsize=None)
def _bit_mask(qubit_count: int, qubit: int) -> np.ndarray:
    """Boolean mask over basis indices where `qubit` reads 1."""
    idx = np.arange(2**qubit_count)
    return ((idx >> (qubit_count - 1 - qubit)) & 1).astype(bool)


@lru_cache(maxsize=None)
def _pair_mask(qubit_count: int, a: int, b: int) -> np.ndarray:
    return _bit_mask(qubit_count, a) & _bit_mask(qubit_count, b)


def _apply_rotation_inplace(amps, qubit_count, qubit, axis, angle):
    """Rotate one qubit of a (batch, 2^n) amplitude block in place."""
    half = 0.5 * angle
    c, s = math.cos(half), math.sin(half)
    post = 2 ** (qubit_count - 1 - qubit)
    view = amps.reshape(-1, 2, post)
    a0 = view[:, 0, :]
    a1 = view[:, 1, :]
    if axis == "Z":
        a0 *= complex(c, -s)
        a1 *= complex(c, s)
    elif axis == "Y":
        tmp = a0 * c - a1 * s
        a1 *= c
        a1 += a0 * s
        a0[:] = tmp
    else:  # X
        tmp = a0 * c + a1 * (-1j * s)
        a1 *= c
        a1 += a0 * (-1j * s)
        a0[:] = tmp


def _apply_entangler_inplace(amps, qubit_count, control, target):
    if ENTANGLER_GATE == "CZ":
        mask = _pair_mask(qubit_count, control, target)
        amps[:, mask] *= -1.0
    else:  # CNOT
        on = _bit_mask(qubit_count, control)
        flip = np.arange(2**qubit_count) ^ (1 << (qubit_count - 1 - target))
        swapped = amps[:, flip]
        amps[:, on] = swapped[:, on]


def _apply_gates(amps: np.ndarray, circuit: Circuit, params: np.ndarray) -> None:
    n = circuit.qubit_count
    for g in circuit.gates:
        if isinstance(g, Rotation):
            _apply_rotation_inplace(amps, n, g.qubit, g.axis, params[g.parameter_index])
        else:
            _apply_entangler_inplace(amps, n, g.control, g.target)


def apply_circuit(circuit: Circuit, params, state: StateVector) -> StateVector:
    """Apply the circuit to an arbitrary input state."""
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.parameter_count,):
        raise ValueError(
            f"expected {circuit.parameter_count} parameters, got {params.shape}"
        )
    if state.qubit_count != circuit.qubit_count:
        raise ValueError("state and circuit qubit counts differ")
    amps = state.amplitudes.copy().reshape(1, -1)
    _apply_gates(amps, circuit, params)
    return StateVector(circuit.qubit_count, amps.ravel())


def run_circuit(circuit: Circuit, params) -> StateVector:
    """Apply the circuit to |0...0>."""
    return apply_circuit(circuit, params, zero_state(circuit.qubit_count))


def apply_circuit_batch(circuit: Circuit, params, states: np.ndarray) -> np.ndarray:
    """Apply one circuit to a (batch, 2^n) stack of amplitude rows at once."""
    params = np.asarray(params, dtype=float)
    amps = np.array(states, dtype=complex)
    _apply_gates(amps, circuit, params)
    return amps


def append_ancilla(state: StateVector) -> StateVector:
    """Tensor a |0> ancilla onto the register as the new highest-index qubit."""
    amps = np.zeros(2 * state.amplitudes.size, dtype=complex)
    amps[0::2] = state.amplitudes
    return StateVector(state.qubit_count + 1, amps)


def ancilla_zero_probability(state: StateVector, ancilla_qubit: int) -> float:
    """Probability of reading 0 on one qubit: Tr[P_0 rho] for the projector
    onto that qubit's |0> subspace."""
    if not 0 <= ancilla_qubit < state.qubit_count:
        raise IndexError(f"qubit {ancilla_qubit} out of range")
    mask = _bit_mask(state.qubit_count, ancilla_qubit)
    return float(np.sum(state.probabilities[~mask]))


def sample_counts(
    state: StateVector,
    shots: int,
    noise: ReadoutNoise | None = None,
    rng_seed: int | np.random.Generator = 0,
) -> np.ndarray:
    """Histogram vector of `shots` measurement outcomes of the full register."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(rng_seed)
    probs = state.probabilities
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    counts = rng.multinomial(shots, probs)
    if noise is not None:
        if noise.qubit_count != state.qubit_count:
            raise ValueError("noise model qubit count mismatch")
        counts = noise.corrupt_counts(counts, rng)
    return counts


def sample_bitstrings(
    state: StateVector,
    shots: int,
    noise: ReadoutNoise | None = None,
    rng_seed: int | np.random.Generator = 0,
) -> ShotHistogram:
    """Draw i.i.d. basis states from |amplitude|^2, optionally through
    readout noise; deterministic for a fixed seed."""
    counts = sample_counts(state, shots, noise, rng_seed)
    return ShotHistogram.from_vector(counts, state.qubit_count)
