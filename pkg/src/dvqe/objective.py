"""Generator/Discriminator cost functions and convergence diagnostics.

The Generator cost adds a weighted misclassification penalty to the plain
variational energy; the Discriminator cost rewards accepting every known
eigenstate while rejecting the generated one.  Both reduce to ancilla
projector probabilities of the Discriminator circuit, so they evaluate
identically in exact and shot-sampled modes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .ansatz import AnsatzSpec, build_generator, initial_parameters
from .mitigation import ConfusionMatrix, ReadoutNoise, calibrate, mitigate
from .optim import rotosolve_sweep
from .pauli import PauliSum, expectation_exact, expectation_sampled
from .simulator import (
    Circuit,
    StateVector,
    ancilla_zero_probability,
    append_ancilla,
    apply_circuit_batch,
    run_circuit,
    sample_counts,
    _bit_mask,
)

__all__ = [
    "EvaluationMode",
    "Mitigator",
    "Ladder",
    "LadderLevel",
    "MixingRule",
    "DiscriminatorDiagnostics",
    "c_gen",
    "c_disc",
    "gen_cost_factory",
    "disc_cost_factory",
    "select_gamma",
    "diagnostics",
]

LADDER_MONOTONE_TOL = 1e-6


@dataclass
class Mitigator:
    """Confusion matrices keyed by register size, applied to every sampled
    histogram (both Hamiltonian-term readouts and ancilla readouts)."""

    matrices: dict[int, ConfusionMatrix] = field(default_factory=dict)

    @classmethod
    def calibrated(
        cls,
        noise: ReadoutNoise | None,
        qubit_counts: tuple[int, ...],
        shots: int = 8192,
        rng_seed: int = 0,
    ) -> "Mitigator":
        if noise is None:
            return cls({})
        mats = {}
        for i, n in enumerate(sorted(set(qubit_counts))):
            sub = ReadoutNoise(noise.p01[:n], noise.p10[:n])
            mats[n] = calibrate(n, shots, sub, rng_seed + i)
        return cls(mats)

    def matrix_for(self, qubit_count: int) -> ConfusionMatrix | None:
        return self.matrices.get(qubit_count)

    def unfold(self, counts: np.ndarray, qubit_count: int) -> np.ndarray:
        m = self.matrices.get(qubit_count)
        if m is None:
            return np.asarray(counts, dtype=float)
        return mitigate(np.asarray(counts, dtype=float), m)


@dataclass
class EvaluationMode:
    """How expectation values are obtained: exact statevector algebra, or
    simulated shots with optional readout noise and unfolding."""

    kind: str
    shots: int = 0
    noise: ReadoutNoise | None = None
    rng: np.random.Generator | None = None
    mitigator: Mitigator | None = None

    @classmethod
    def exact(cls) -> "EvaluationMode":
        return cls("exact")

    @classmethod
    def sampled(
        cls,
        shots: int,
        noise: ReadoutNoise | None = None,
        seed: int = 0,
        mitigator: Mitigator | None = None,
    ) -> "EvaluationMode":
        if shots < 1:
            raise ValueError("sampled mode needs shots >= 1")
        return cls("sampled", shots, noise, np.random.default_rng(seed), mitigator)

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def with_shots(self, shots: int, seed: int) -> "EvaluationMode":
        """Same noise/unfolding setup with a fresh deterministic stream."""
        if self.is_exact:
            return self
        return EvaluationMode(
            "sampled", shots, self.noise, np.random.default_rng(seed), self.mitigator
        )

    def _noise_for(self, qubit_count: int) -> ReadoutNoise | None:
        if self.noise is None:
            return None
        if self.noise.qubit_count == qubit_count:
            return self.noise
        return ReadoutNoise(self.noise.p01[:qubit_count], self.noise.p10[:qubit_count])

    def energy(self, state: StateVector, h: PauliSum) -> float:
        if self.is_exact:
            return expectation_exact(state, h)
        confusion = (
            self.mitigator.matrix_for(state.qubit_count) if self.mitigator else None
        )
        return expectation_sampled(
            state, h, self.shots, self._noise_for(state.qubit_count), self.rng, confusion
        )

    def zero_probability(self, state: StateVector, ancilla_qubit: int) -> float:
        if self.is_exact:
            return ancilla_zero_probability(state, ancilla_qubit)
        counts = sample_counts(
            state, self.shots, self._noise_for(state.qubit_count), self.rng
        )
        weights = (
            self.mitigator.unfold(counts, state.qubit_count)
            if self.mitigator
            else counts.astype(float)
        )
        mask = _bit_mask(state.qubit_count, ancilla_qubit)
        return float(weights[~mask].sum() / weights.sum())


@dataclass(frozen=True)
class MixingRule:
    """Equiprobable presentation of the known states to the Discriminator."""

    known_count: int

    @property
    def weight(self) -> float:
        return 1.0 / self.known_count


@dataclass
class LadderLevel:
    """One converged eigenstate approximation: the generator parameters that
    prepare it, its energy, and the circuit shape used."""

    theta: np.ndarray
    energy: float
    spec: AnsatzSpec
    phi: np.ndarray | None = None
    gamma: float | None = None
    state: StateVector | None = None

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.state is None:
            self.state = run_circuit(build_generator(self.spec), self.theta)


@dataclass
class Ladder:
    """Accumulated eigenstate approximations, lowest first.

    Energies are variational upper bounds for successive eigenvalues, so they
    must be non-decreasing (within tolerance) as levels are appended.
    ``gamma`` is the penalty weight in force for the level currently being
    optimized.
    """

    hamiltonian: PauliSum
    levels: list[LadderLevel] = field(default_factory=list)
    gamma: float = 0.0

    def __len__(self) -> int:
        return len(self.levels)

    def append(self, level: LadderLevel, monotone_tol: float = LADDER_MONOTONE_TOL) -> None:
        if self.levels and level.energy < self.levels[-1].energy - monotone_tol:
            warnings.warn(
                f"ladder energy decreased: level {len(self.levels)} at "
                f"{level.energy:.8f} after {self.levels[-1].energy:.8f}",
                stacklevel=2,
            )
        self.levels.append(level)

    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels])

    def known_states(self) -> list[StateVector]:
        return [lv.state for lv in self.levels]


def _stack_with_ancilla(inputs: list[StateVector]) -> np.ndarray:
    """Rows of system-register amplitudes, each tensored with an ancilla |0>
    as the new highest-indexed qubit."""
    return np.stack([append_ancilla(s).amplitudes for s in inputs])


def _discriminator_zero_probs(
    discriminator: Circuit,
    phi: np.ndarray,
    stacked_inputs: np.ndarray,
    mode: EvaluationMode,
) -> list[float]:
    """Ancilla-zero probability of the Discriminator for each input row."""
    ancilla = discriminator.qubit_count - 1
    outputs = apply_circuit_batch(discriminator, phi, stacked_inputs)
    return [
        mode.zero_probability(StateVector(discriminator.qubit_count, row), ancilla)
        for row in outputs
    ]


def gen_cost_factory(
    phi,
    ladder: Ladder,
    mode: EvaluationMode,
    generator: Circuit,
    discriminator: Circuit,
):
    """Generator cost as a function of theta at fixed Discriminator parameters."""
    phi = np.asarray(phi, dtype=float)

    def cost(theta) -> float:
        psi_g = run_circuit(generator, np.asarray(theta, dtype=float))
        energy = mode.energy(psi_g, ladder.hamiltonian)
        (p0_g,) = _discriminator_zero_probs(
            discriminator, phi, _stack_with_ancilla([psi_g]), mode
        )
        return energy + ladder.gamma * p0_g

    return cost


def disc_cost_factory(
    theta_g,
    ladder: Ladder,
    mode: EvaluationMode,
    generator: Circuit,
    discriminator: Circuit,
):
    """Discriminator cost as a function of phi at a fixed generated state.

    The generated and known input states do not depend on phi, so they are
    prepared once up front.
    """
    if not ladder.levels:
        raise ValueError("discriminator cost undefined for an empty ladder")
    psi_g = run_circuit(generator, np.asarray(theta_g, dtype=float))
    stacked = _stack_with_ancilla([psi_g, *ladder.known_states()])

    def cost(phi) -> float:
        probs = _discriminator_zero_probs(
            discriminator, np.asarray(phi, dtype=float), stacked, mode
        )
        return probs[0] - sum(probs[1:])

    return cost


def c_gen(
    theta,
    phi,
    ladder: Ladder,
    mode: EvaluationMode,
    generator: Circuit,
    discriminator: Circuit,
) -> float:
    """Generator cost: energy plus gamma times the probability that the
    Discriminator (wrongly) accepts the generated state as known."""
    return gen_cost_factory(phi, ladder, mode, generator, discriminator)(theta)


def c_disc(
    phi,
    theta_g,
    ladder: Ladder,
    mode: EvaluationMode,
    generator: Circuit,
    discriminator: Circuit,
) -> float:
    """Discriminator cost: accept-probability of the generated state minus
    the sum of accept-probabilities of the known states; range [-(n+1), 1]."""
    return disc_cost_factory(theta_g, ladder, mode, generator, discriminator)(phi)


def _mini_vqe(h: PauliSum, spec: AnsatzSpec, restarts: int = 3, sweeps: int = 60) -> float:
    """Small exact-mode Rotosolve VQE used for spectral-edge estimates."""
    circuit = build_generator(spec)
    rng = np.random.default_rng(7)
    best = np.inf
    for _ in range(restarts):
        params = initial_parameters(circuit.parameter_count, rng)

        def cost(p):
            return expectation_exact(run_circuit(circuit, p), h)

        prev = cost(params)
        for _ in range(sweeps):
            params = rotosolve_sweep(cost, params)
            now = cost(params)
            if abs(prev - now) < 1e-10:
                break
            prev = now
        best = min(best, prev)
    return best


def select_gamma(
    h: PauliSum,
    level: int,
    method: str = "exact",
    safety: float = 1.2,
    vqe_spec: AnsatzSpec | None = None,
    e_min: float | None = None,
    sampled_cap: bool = False,
) -> float:
    """Penalty weight for solving the given excitation level.

    The weight must exceed (number of known states) times the energy gap up
    to the target level; safety * (level + 1) * spectral range is a cheap
    upper bound for it.  ``exact`` reads the spectral range off the dense
    spectrum; ``inverse_vqe`` estimates the top of the spectrum by running a
    VQE on the negated operator (and the bottom likewise unless ``e_min``
    is supplied, e.g. from an already-solved ground level).

    With ``sampled_cap`` the result is clamped to safety * spectral range:
    under shot noise an oversized weight amplifies residual misclassification
    into the energy estimate.
    """
    if level < 1:
        raise ValueError("gamma selection applies to excited levels (level >= 1)")
    if safety < 1.0:
        raise ValueError("safety factor must be >= 1")
    if method == "exact":
        from .oracle import exact_spectrum

        spectrum = exact_spectrum(h)
        spread = spectrum.spectral_range()
    elif method == "inverse_vqe":
        spec = vqe_spec or AnsatzSpec(h.qubit_count, layers=3, axes_per_layer=("Y", "X", "Z"))
        e_max = -_mini_vqe(h.negated(), spec)
        if e_min is None:
            e_min = _mini_vqe(h, spec)
        spread = e_max - e_min
    else:
        raise ValueError(f"unknown gamma method {method!r}")
    gamma = safety * (level + 1) * spread
    if sampled_cap:
        gamma = min(gamma, safety * spread)
    return gamma


@dataclass
class DiscriminatorDiagnostics:
    """Per-state acceptance probabilities and oracle-computed cross terms.

    ``acceptance[i]`` is the presentation weight times the probability that
    known state i is accepted; it should approach weight * 1 as the
    Discriminator trains.  ``cross_magnitudes[i]`` measures the eigenbasis
    interference terms of the generated state, which a trained Discriminator
    drives to zero.  Cross terms require the eigenbasis, so they exist only
    in exact simulation.
    """

    acceptance: np.ndarray
    cross_magnitudes: np.ndarray


def diagnostics(
    phi,
    theta_g,
    ladder: Ladder,
    generator: Circuit,
    discriminator: Circuit,
    mode: EvaluationMode | None = None,
) -> DiscriminatorDiagnostics:
    """Convergence diagnostics of the alternating scheme (exact mode only)."""
    if mode is not None and not mode.is_exact:
        raise ValueError("diagnostics need exact simulation; cross terms are not measurable")
    if not ladder.levels:
        raise ValueError("diagnostics undefined for an empty ladder")
    from .oracle import exact_spectrum

    phi = np.asarray(phi, dtype=float)
    exact = EvaluationMode.exact()
    rule = MixingRule(len(ladder))
    known_probs = _discriminator_zero_probs(
        discriminator, phi, _stack_with_ancilla(ladder.known_states()), exact
    )
    acceptance = rule.weight * np.array(known_probs)

    spectrum = exact_spectrum(ladder.hamiltonian)
    psi_g = run_circuit(generator, np.asarray(theta_g, dtype=float))
    alpha = spectrum.eigenvectors.conj().T @ psi_g.amplitudes
    dim = alpha.size
    ancilla = discriminator.qubit_count - 1
    eigenstates = [
        StateVector(ladder.hamiltonian.qubit_count, spectrum.eigenvectors[:, i])
        for i in range(dim)
    ]
    outputs = apply_circuit_batch(discriminator, phi, _stack_with_ancilla(eigenstates))
    keep = ~_bit_mask(discriminator.qubit_count, ancilla)
    projected = outputs[:, keep]
    gram = projected.conj() @ projected.T  # gram[j, i] = <chi_j|P0|chi_i>
    cross = np.array(
        [
            rule.weight
            * alpha[i]
            * np.sum(np.delete(alpha.conj() * gram[:, i], i))
            for i in range(dim)
        ]
    )
    return DiscriminatorDiagnostics(acceptance, np.abs(cross))
