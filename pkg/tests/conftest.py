"""Shared fixtures and independent reference constructions.

The reference implementations here deliberately take different code paths
from the package: matrices are assembled entry-wise from single-qubit matrix
elements, circuits become explicit dense unitary products, and derivatives
come from central finite differences.
"""

import numpy as np
import pytest

from dvqe.pauli import PauliSum, PauliTerm
from dvqe.simulator import Circuit, Entangler, Rotation

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def ref_pauli_matrix(axes: str) -> np.ndarray:
    """Entry-wise Pauli-string matrix: element (i, j) is the product of
    single-qubit matrix elements over the bits of i and j."""
    n = len(axes)
    dim = 2**n
    out = np.empty((dim, dim), dtype=complex)
    for i in range(dim):
        ib = format(i, f"0{n}b")
        for j in range(dim):
            jb = format(j, f"0{n}b")
            val = 1.0 + 0.0j
            for q in range(n):
                val *= SINGLE[axes[q]][int(ib[q]), int(jb[q])]
            out[i, j] = val
    return out


def ref_hamiltonian_matrix(h: PauliSum) -> np.ndarray:
    dim = 2**h.qubit_count
    out = np.zeros((dim, dim), dtype=complex)
    for t in h.terms:
        out += t.coefficient * ref_pauli_matrix(t.axes)
    return out


def ref_gate_unitary(gate, qubit_count: int, angle: float | None = None) -> np.ndarray:
    """Dense unitary of one gate via Kronecker padding with identities."""
    if isinstance(gate, Rotation):
        half = 0.5 * angle
        local = np.cos(half) * SINGLE["I"] - 1j * np.sin(half) * SINGLE[gate.axis]
        mats = [local if q == gate.qubit else SINGLE["I"] for q in range(qubit_count)]
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out
    # controlled-Z: flip the sign of basis states with both bits set
    dim = 2**qubit_count
    out = np.eye(dim, dtype=complex)
    for i in range(dim):
        bits = format(i, f"0{qubit_count}b")
        if bits[gate.control] == "1" and bits[gate.target] == "1":
            out[i, i] = -1.0
    return out


def ref_circuit_unitary(circuit: Circuit, params) -> np.ndarray:
    """Product of dense gate unitaries, later gates multiplied on the left."""
    params = np.asarray(params, dtype=float)
    dim = 2**circuit.qubit_count
    u = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        angle = params[g.parameter_index] if isinstance(g, Rotation) else None
        u = ref_gate_unitary(g, circuit.qubit_count, angle) @ u
    return u


def ref_finite_difference(cost, params, index: int, step: float = 1e-5) -> float:
    params = np.asarray(params, dtype=float)
    up = params.copy()
    up[index] += step
    down = params.copy()
    down[index] -= step
    return (cost(up) - cost(down)) / (2 * step)


def random_pauli_sum(seed: int, qubit_count: int, term_count: int = 8) -> PauliSum:
    """Random Hermitian Pauli sum with distinct strings, coefficients U[-1,1]."""
    rng = np.random.default_rng(seed)
    term_count = min(term_count, 4**qubit_count)
    seen = set()
    terms = []
    while len(terms) < term_count:
        axes = "".join(rng.choice(list("IXYZ"), qubit_count))
        if axes in seen:
            continue
        seen.add(axes)
        terms.append(PauliTerm(float(rng.uniform(-1, 1)), axes))
    return PauliSum(qubit_count, tuple(terms))


def random_state(seed: int, qubit_count: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=2**qubit_count) + 1j * rng.normal(size=2**qubit_count)
    return amps / np.linalg.norm(amps)


def random_circuit(seed: int, qubit_count: int, gate_count: int = 12) -> tuple[Circuit, np.ndarray]:
    """Random rotation/entangler circuit plus matching random parameters."""
    rng = np.random.default_rng(seed)
    gates = []
    param_index = 0
    for _ in range(gate_count):
        if qubit_count > 1 and rng.random() < 0.3:
            a, b = rng.choice(qubit_count, size=2, replace=False)
            gates.append(Entangler(int(a), int(b)))
        else:
            gates.append(
                Rotation(str(rng.choice(list("XYZ"))), int(rng.integers(qubit_count)), param_index)
            )
            param_index += 1
    circuit = Circuit(qubit_count, tuple(gates), param_index)
    return circuit, rng.uniform(-np.pi, np.pi, param_index)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
