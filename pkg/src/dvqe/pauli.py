"""Weighted Pauli-string operators and their expectation values.

A Hamiltonian is a real-weighted sum of Pauli strings over a fixed register.
Expectations are available exactly (term-wise statevector algebra, never
forming the dense matrix) and from simulated measurement shots with optional
readout noise and unfolding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .mitigation import ConfusionMatrix, ReadoutNoise, mitigate
from .simulator import StateVector, sample_counts

__all__ = [
    "PauliTerm",
    "PauliSum",
    "PauliParseError",
    "parse_pauli_sum",
    "dense_matrix",
    "expectation_exact",
    "expectation_sampled",
]

AXES = "IXYZ"
QUBIT_GUARD = 12  # dense construction above this register size is refused

SINGLE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

# Basis changes mapping the named axis onto Z, applied before a Z-basis
# readout.  H X H = Z and (H Sdg) Y (H Sdg)^dag = Z; any unbiased choice works.
_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
_S_DAGGER = np.array([[1.0, 0.0], [0.0, -1.0j]], dtype=complex)
_BASIS_CHANGE = {"X": _HADAMARD, "Y": _HADAMARD @ _S_DAGGER}


class PauliParseError(ValueError):
    """Malformed Hamiltonian document; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string, e.g. 0.5 * ZIX."""

    coefficient: float
    axes: str

    def __post_init__(self):
        if not np.isfinite(self.coefficient):
            raise ValueError(f"non-finite coefficient {self.coefficient}")
        if not self.axes or any(a not in AXES for a in self.axes):
            raise ValueError(f"axes {self.axes!r} must be a non-empty word over I, X, Y, Z")

    @property
    def is_identity(self) -> bool:
        return set(self.axes) == {"I"}

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, a in enumerate(self.axes) if a != "I")


@dataclass(frozen=True)
class PauliSum:
    """Hermitian operator sum(c_k * P_k) on a fixed number of qubits."""

    qubit_count: int
    terms: tuple[PauliTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.qubit_count < 1:
            raise ValueError("qubit_count must be >= 1")
        for t in self.terms:
            if len(t.axes) != self.qubit_count:
                raise ValueError(
                    f"term {t.axes!r} has {len(t.axes)} axes on a "
                    f"{self.qubit_count}-qubit register"
                )

    def __iter__(self):
        return iter(self.terms)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(
            self.qubit_count,
            tuple(PauliTerm(factor * t.coefficient, t.axes) for t in self.terms),
        )

    def negated(self) -> "PauliSum":
        return self.scaled(-1.0)

    def to_text(self) -> str:
        return "\n".join(f"{t.coefficient!r} {t.axes}" for t in self.terms) + "\n"


def parse_pauli_sum(text: str) -> PauliSum:
    """Parse the line-oriented Hamiltonian format.

    Each non-blank, non-comment line reads ``<coefficient> <axes>`` with the
    axes word over I/X/Y/Z; ``#`` starts a comment.  All axes words must have
    the same length, which becomes the qubit count.
    """
    terms: list[PauliTerm] = []
    qubit_count: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise PauliParseError(
                f"expected '<coefficient> <axes>', got {raw.strip()!r}", lineno
            )
        coeff_text, axes = parts
        try:
            coeff = float(coeff_text)
        except ValueError:
            raise PauliParseError(f"malformed coefficient {coeff_text!r}", lineno) from None
        if not np.isfinite(coeff):
            raise PauliParseError(f"non-finite coefficient {coeff_text!r}", lineno)
        axes = axes.upper()
        bad = [a for a in axes if a not in AXES]
        if bad:
            raise PauliParseError(f"illegal axis letter {bad[0]!r} in {axes!r}", lineno)
        if qubit_count is None:
            qubit_count = len(axes)
        elif len(axes) != qubit_count:
            raise PauliParseError(
                f"axes word {axes!r} has length {len(axes)}, expected {qubit_count}",
                lineno,
            )
        terms.append(PauliTerm(coeff, axes))
    if not terms:
        raise PauliParseError("document contains no terms", 1)
    return PauliSum(qubit_count, tuple(terms))


def dense_matrix(h: PauliSum) -> np.ndarray:
    """Dense 2^n x 2^n Hermitian matrix of the operator (oracle support)."""
    if h.qubit_count > QUBIT_GUARD:
        raise ValueError(
            f"dense matrix refused for {h.qubit_count} qubits (guard {QUBIT_GUARD})"
        )
    dim = 2**h.qubit_count
    out = np.zeros((dim, dim), dtype=complex)
    for t in h.terms:
        out += t.coefficient * reduce(np.kron, (SINGLE_QUBIT[a] for a in t.axes))
    return out


@lru_cache(maxsize=None)
def _term_action(qubit_count: int, axes: str):
    """Precompute P|psi> as a permutation and a phase vector.

    <b'|P|b> is non-zero only for b' = b xor flip_mask (X/Y qubits) and then
    equals i^(#Y) * (-1)^(bits of b on Z/Y qubits).
    """
    idx = np.arange(2**qubit_count)
    flip_mask = 0
    sign_mask = 0
    n_y = 0
    for q, a in enumerate(axes):
        bit = 1 << (qubit_count - 1 - q)
        if a in ("X", "Y"):
            flip_mask |= bit
        if a in ("Z", "Y"):
            sign_mask |= bit
        if a == "Y":
            n_y += 1
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & sign_mask) & 1)
    phase = 1j**n_y
    return idx ^ flip_mask, signs * phase


def _apply_term(amps: np.ndarray, qubit_count: int, axes: str) -> np.ndarray:
    perm, weight = _term_action(qubit_count, axes)
    out = np.empty_like(amps)
    out[perm] = amps * weight
    return out


def expectation_exact(state: StateVector, h: PauliSum) -> float:
    """sum(c_k <psi|P_k|psi>), evaluated term by term."""
    if state.qubit_count != h.qubit_count:
        raise ValueError(
            f"state has {state.qubit_count} qubits, operator {h.qubit_count}"
        )
    amps = state.amplitudes
    total = 0.0 + 0.0j
    for t in h.terms:
        if t.is_identity:
            total += t.coefficient
        else:
            total += t.coefficient * np.vdot(amps, _apply_term(amps, h.qubit_count, t.axes))
    return float(total.real)


@lru_cache(maxsize=None)
def _parity_signs(qubit_count: int, support_mask: int) -> np.ndarray:
    """(-1)^(parity of the supported bits) for every basis index."""
    idx = np.arange(2**qubit_count)
    return 1.0 - 2.0 * (np.bitwise_count(idx & support_mask) & 1)


def _measured_state(state: StateVector, term: PauliTerm) -> StateVector:
    """Rotate the support qubits of one term into the Z basis."""
    amps = state.amplitudes.copy()
    n = state.qubit_count
    for q, a in enumerate(term.axes):
        if a in ("X", "Y"):
            post = 2 ** (n - 1 - q)
            view = amps.reshape(-1, 2, post)
            u = _BASIS_CHANGE[a]
            a0 = view[:, 0, :].copy()
            a1 = view[:, 1, :].copy()
            view[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
            view[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
    return StateVector(n, amps)


def expectation_sampled(
    state: StateVector,
    h: PauliSum,
    shots_per_term: int,
    noise: ReadoutNoise | None = None,
    rng_seed: int | np.random.Generator = 0,
    confusion: ConfusionMatrix | None = None,
) -> float:
    """Shot-based estimate of the expectation value.

    Every non-identity term is measured independently: its support qubits are
    rotated into the Z basis, ``shots_per_term`` bitstrings are sampled
    (through ``noise`` when given, unfolded through ``confusion`` when given)
    and the +-1 parities over the support are averaged.  Identity terms
    contribute their coefficient with no shots.  Deterministic per seed.
    """
    if state.qubit_count != h.qubit_count:
        raise ValueError(
            f"state has {state.qubit_count} qubits, operator {h.qubit_count}"
        )
    if shots_per_term < 1:
        raise ValueError("shots_per_term must be >= 1")
    rng = np.random.default_rng(rng_seed)
    n = h.qubit_count
    total = 0.0
    for t in h.terms:
        if t.is_identity:
            total += t.coefficient
            continue
        rotated = _measured_state(state, t)
        counts = sample_counts(rotated, shots_per_term, noise, rng)
        weights = counts.astype(float)
        if confusion is not None:
            weights = mitigate(weights, confusion)
        support_mask = 0
        for q in t.support:
            support_mask |= 1 << (n - 1 - q)
        signs = _parity_signs(n, support_mask)
        total += t.coefficient * float(signs @ weights) / float(weights.sum())
    return total
