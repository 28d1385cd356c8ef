"""Exact reference results via dense diagonalization.

Everything here exists to check the variational machinery: full spectra,
state overlaps and eigenbasis decompositions of generated states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzSpec, build_generator
from .pauli import PauliSum, dense_matrix
from .simulator import StateVector, run_circuit

__all__ = [
    "Spectrum",
    "exact_spectrum",
    "overlaps",
    "alpha_decomposition",
    "state_decomposition",
    "degenerate_blocks",
]


@dataclass
class Spectrum:
    """Ascending eigenvalues with a matching orthonormal eigenvector column set."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def energy(self, level: int) -> float:
        return float(self.eigenvalues[level])

    def spectral_range(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])


def exact_spectrum(h: PauliSum) -> Spectrum:
    """Full eigendecomposition of the dense operator."""
    w, v = np.linalg.eigh(dense_matrix(h))
    return Spectrum(w, v)


def overlaps(theta_i, theta_j, spec: AnsatzSpec) -> float:
    """Squared overlap of the two states one generator prepares."""
    circuit = build_generator(spec)
    a = run_circuit(circuit, theta_i).amplitudes
    b = run_circuit(circuit, theta_j).amplitudes
    return float(np.abs(np.vdot(a, b)) ** 2)


def state_decomposition(state: StateVector, spectrum: Spectrum) -> np.ndarray:
    """Squared projections of a state onto the oracle eigenvectors."""
    coeffs = spectrum.eigenvectors.conj().T @ state.amplitudes
    return np.abs(coeffs) ** 2


def alpha_decomposition(theta, spectrum: Spectrum, spec: AnsatzSpec) -> np.ndarray:
    """Eigenbasis weights of the generated state; sums to one for a
    normalized input (Parseval)."""
    state = run_circuit(build_generator(spec), theta)
    return state_decomposition(state, spectrum)


def degenerate_blocks(eigenvalues: np.ndarray, tol: float = 1e-8) -> list[list[int]]:
    """Group eigenvalue indices whose values coincide within tol.

    Converged states in a degenerate subspace may land on any basis of the
    block, so block projectors, not individual vectors, are the comparable
    objects.
    """
    blocks: list[list[int]] = []
    for i, w in enumerate(eigenvalues):
        if blocks and abs(w - eigenvalues[blocks[-1][-1]]) <= tol:
            blocks[-1].append(i)
        else:
            blocks.append([i])
    return blocks
