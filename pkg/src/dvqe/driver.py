"""Run orchestration: ground-state VQE, the alternating excited-state
scheme, warm-started dissociation sweeps and report emission.

Every run is driven by a single root seed; all randomness (parameter
initialization, shot sampling, calibration) is fanned out deterministically
per (point, level, cycle), so identical settings reproduce identical reports
byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ansatz import (
    AnsatzSpec,
    DepthSchedule,
    build_discriminator,
    build_generator,
    depth_for_level,
    initial_parameters,
)
from .mitigation import ReadoutNoise
from .objective import (
    DiscriminatorDiagnostics,
    EvaluationMode,
    Ladder,
    LadderLevel,
    Mitigator,
    diagnostics,
    disc_cost_factory,
    gen_cost_factory,
    select_gamma,
)
from .objective import _stack_with_ancilla
from .optim import RotosolveState, RpropState, rotosolve_sweep, rprop_step
from .oracle import Spectrum, exact_spectrum
from .pauli import QUBIT_GUARD, PauliSum, dense_matrix, expectation_exact, parse_pauli_sum
from .quadratic import (
    QuadraticCost,
    gate_sweep_order,
    quadratic_gradient,
    rotosolve_sweep_quadratic,
)
from .simulator import Circuit, _bit_mask, apply_circuit_batch, run_circuit

__all__ = [
    "Schedule",
    "ShotSchedule",
    "SweepPlan",
    "OptimizerSettings",
    "GammaSettings",
    "AnsatzSettings",
    "WarmStartSettings",
    "RunSettings",
    "CallCounter",
    "GroundResult",
    "ExcitedResult",
    "LadderResult",
    "PointReport",
    "SweepReport",
    "fanout_seed",
    "load_hamiltonian",
    "solve_ground",
    "solve_excited",
    "solve_ladder",
    "sweep",
]

# seed fan-out scopes
_INIT, _DISC, _GEN, _CYCLE, _FINAL, _CALIBRATION, _GROUND, _POINT, _RESTART = range(9)


def fanout_seed(root: int, *scope: int) -> int:
    """Deterministic child seed for a nested run scope."""
    return int(
        np.random.SeedSequence([int(root), *map(int, scope)]).generate_state(1)[0]
    )


def load_hamiltonian(path: str | Path) -> PauliSum:
    return parse_pauli_sum(Path(path).read_text())


@dataclass(frozen=True)
class Schedule:
    """Alternation plan for one excited level: per outer cycle, the
    Discriminator is optimized first, then the Generator.  Convergence is
    declared when the energy trace moves less than the tolerance across a
    window of cycles.

    With ``disc_to_convergence`` (exact mode only) the Discriminator phase
    keeps sweeping past its fixed iteration count until its own cost
    plateaus, up to ``disc_sweep_cap`` sweeps.  A fully re-centered
    Discriminator removes the stale penalty slope that otherwise blocks the
    Generator's late-stage descent on larger registers.
    """

    disc_iters_per_cycle: int = 3
    gen_iters_per_cycle: int = 3
    outer_cycles: int = 40
    convergence_tol: float = 1e-4
    convergence_window: int = 2
    disc_to_convergence: bool = False
    disc_sweep_cap: int = 15
    disc_converge_tol: float = 1e-9
    gen_to_convergence: bool = False
    gen_sweep_cap: int = 40
    gen_converge_tol: float = 1e-11
    refine_cycles: int = 0  # extra small-step (Rprop) generator cycles, exact mode
    refine_gen_iters: int = 3

    def __post_init__(self):
        if min(self.disc_iters_per_cycle, self.gen_iters_per_cycle, self.outer_cycles,
               self.convergence_window) < 1:
            raise ValueError("schedule counts must be >= 1")
        if self.convergence_tol <= 0:
            raise ValueError("convergence tolerance must be positive")
        if self.disc_sweep_cap < 1 or self.disc_converge_tol <= 0:
            raise ValueError("discriminator sweep cap and tolerance must be positive")
        if self.gen_sweep_cap < 1 or self.gen_converge_tol <= 0:
            raise ValueError("generator sweep cap and tolerance must be positive")
        if self.refine_cycles < 0 or self.refine_gen_iters < 1:
            raise ValueError("refinement cycle counts must be non-negative")

    @classmethod
    def block_descent(
        cls,
        outer_cycles: int = 120,
        convergence_tol: float = 1e-6,
        convergence_window: int = 3,
    ) -> "Schedule":
        """Both players trained to their own plateau every cycle.

        On registers beyond a couple of qubits the alternating game converges
        geometrically under this schedule where shallow phase updates stall;
        exact mode only (sampled phases fall back to the fixed counts).
        """
        return cls(
            disc_iters_per_cycle=1,
            gen_iters_per_cycle=1,
            outer_cycles=outer_cycles,
            convergence_tol=convergence_tol,
            convergence_window=convergence_window,
            disc_to_convergence=True,
            gen_to_convergence=True,
        )


@dataclass(frozen=True)
class ShotSchedule:
    """Shots ramp up across outer cycles; the converged parameters are then
    re-measured final_repeats times at final_shots and averaged."""

    shots_per_outer_cycle: tuple[int, ...] = (256, 1024, 4096, 8000)
    final_shots: int = 8000
    final_repeats: int = 5

    def __post_init__(self):
        ramp = tuple(int(s) for s in self.shots_per_outer_cycle)
        object.__setattr__(self, "shots_per_outer_cycle", ramp)
        if not ramp or any(s < 1 for s in ramp):
            raise ValueError("shot counts must be positive")
        if any(b < a for a, b in zip(ramp, ramp[1:])):
            raise ValueError("shot ramp must be non-decreasing")
        if self.final_shots < ramp[-1] or self.final_repeats < 1:
            raise ValueError("final shots must continue the ramp")

    def shots_at(self, cycle: int) -> int:
        ramp = self.shots_per_outer_cycle
        return ramp[min(cycle, len(ramp) - 1)]


@dataclass
class OptimizerSettings:
    """Which update rule drives each optimization phase."""

    name: str = "rotosolve"
    restarts: int = 1  # independent ground-state starts, best kept
    rprop_initial_step: float = 0.1

    def __post_init__(self):
        if self.name not in ("rotosolve", "rprop"):
            raise ValueError(f"unknown optimizer {self.name!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class GammaSettings:
    """Penalty-weight policy.

    ``cap_always`` clamps the weight to safety * spectral range in every
    mode, not just under sampling; an oversized weight slows (and biases)
    the late-stage generator descent the same way shot noise does.
    """

    method: str = "exact"  # or "inverse_vqe"
    safety: float = 1.2
    override: float | None = None
    sampled_cap: bool = True
    cap_always: bool = False


@dataclass
class AnsatzSettings:
    """Axes and depth schedule from which per-level circuit shapes derive."""

    axes: tuple[str, ...] = ("Y", "X")
    depth: DepthSchedule = field(
        default_factory=lambda: DepthSchedule({0: 2}, {1: 3})
    )

    @classmethod
    def default_for(cls, qubit_count: int) -> "AnsatzSettings":
        gen = qubit_count + 1
        return cls(
            axes=("Y", "X", "Z"),
            depth=DepthSchedule({0: gen}, {1: gen + 1}),
        )

    def generator_spec(self, qubit_count: int, level: int) -> AnsatzSpec:
        layers, _ = depth_for_level(self.depth, level)
        return AnsatzSpec(qubit_count, layers, self.axes)

    def discriminator_spec(self, qubit_count: int, level: int) -> AnsatzSpec:
        _, layers = depth_for_level(self.depth, max(level, 1))
        return AnsatzSpec(qubit_count + 1, layers, self.axes)


@dataclass
class WarmStartSettings:
    enabled: bool = True
    reduced_outer_cycles: int = 2  # one working cycle plus a convergence probe
    retrain_discriminator: bool = False


@dataclass
class RunSettings:
    """Everything a solve needs apart from the Hamiltonian and the seed."""

    mode: str = "exact"  # or "sampled"
    ansatz: AnsatzSettings | None = None
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    schedule: Schedule = field(default_factory=Schedule)
    shot_schedule: ShotSchedule = field(default_factory=ShotSchedule)
    noise: ReadoutNoise | None = None
    mitigation: bool = False
    calibration_shots: int = 8192
    gamma: GammaSettings = field(default_factory=GammaSettings)
    warm_start: WarmStartSettings = field(default_factory=WarmStartSettings)
    level_restarts: int = 3  # reruns of a level whose state collapses onto a known one

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.mitigation and self.mode != "sampled":
            raise ValueError("mitigation requires sampled mode")

    def ansatz_for(self, qubit_count: int) -> AnsatzSettings:
        return self.ansatz or AnsatzSettings.default_for(qubit_count)


@dataclass(frozen=True)
class SweepPlan:
    """Bond-distance scan: every distance maps to a Hamiltonian file; the
    anchor is solved with the full schedule and its parameters warm-start the
    neighbouring points outward."""

    bond_distances: tuple[float, ...]
    anchor_distance: float
    hamiltonian_files: dict[float, str]
    levels: int

    def __post_init__(self):
        object.__setattr__(
            self, "bond_distances", tuple(sorted(float(d) for d in self.bond_distances))
        )
        if self.anchor_distance not in self.bond_distances:
            raise ValueError("anchor distance must be one of the bond distances")
        missing = [d for d in self.bond_distances if d not in self.hamiltonian_files]
        if missing:
            raise ValueError(f"no Hamiltonian file for distances {missing}")
        if self.levels < 1:
            raise ValueError("levels must be >= 1")


@dataclass
class CallCounter:
    """QPU-equivalent request bookkeeping.

    One request covers the update of one parameter: a Rotosolve angle update
    (its three expectation evaluations included) or one angle's
    parameter-shift gradient under Rprop.  Energy-trace evaluations between
    cycles are free bookkeeping, matching the per-point accounting of the
    hardware runs this mirrors.
    """

    counts: dict[str, int] = field(default_factory=dict)

    def add(self, key: str, n: int) -> None:
        self.counts[key] = self.counts.get(key, 0) + int(n)

    def total(self, prefix: str = "") -> int:
        return sum(v for k, v in self.counts.items() if k.startswith(prefix))


@dataclass
class GroundResult:
    theta: np.ndarray
    energy: float
    energy_trace: list[float]
    converged: bool
    iterations: int
    calls: int
    spec: AnsatzSpec


@dataclass
class ExcitedResult:
    level: int
    theta: np.ndarray
    phi: np.ndarray
    energy: float
    energy_trace: list[float]
    cycles: int
    converged: bool
    calls: int
    gamma: float
    generator_spec: AnsatzSpec
    discriminator_spec: AnsatzSpec
    diagnostics: DiscriminatorDiagnostics | None = None
    monotony_warning: str | None = None


def _converged(trace: list[float], tol: float, window: int) -> bool:
    if len(trace) < window + 1:
        return False
    tail = trace[-(window + 1):]
    return max(tail) - min(tail) < tol


class _PhaseOptimizer:
    """One optimization phase (all-theta or all-phi) with persistent state.

    Rotosolve sweeps visit coordinates in circuit-gate order so that the
    generic and the exact-mode fast path walk the parameters identically.
    """

    def __init__(self, settings: OptimizerSettings, circuit: Circuit):
        self.settings = settings
        self.order = RotosolveState(gate_sweep_order(circuit))
        self.rprop = (
            RpropState.fresh(circuit.parameter_count, settings.rprop_initial_step)
            if settings.name == "rprop"
            else None
        )

    def iterate(self, cost, params: np.ndarray) -> np.ndarray:
        if self.settings.name == "rotosolve":
            if isinstance(cost, QuadraticCost):
                return rotosolve_sweep_quadratic(cost, params)
            return rotosolve_sweep(cost, params, self.order)
        params, self.rprop = rprop_step(cost, params, self.rprop)
        return params


def _basis_zero(qubit_count: int) -> np.ndarray:
    e0 = np.zeros(2**qubit_count, dtype=complex)
    e0[0] = 1.0
    return e0


def _ancilla_keep_projector(qubit_count: int) -> np.ndarray:
    """Diagonal projector onto ancilla-zero basis states (ancilla = last qubit)."""
    keep = ~_bit_mask(qubit_count, qubit_count - 1)
    return np.diag(keep.astype(float))


def _dense_unitary(circuit: Circuit, params) -> np.ndarray:
    basis = np.eye(2**circuit.qubit_count, dtype=complex)
    return apply_circuit_batch(circuit, params, basis).T


def _with_extra_qubit(circuit: Circuit) -> Circuit:
    """Same gates on a register grown by one (the appended ancilla idles)."""
    return Circuit(circuit.qubit_count + 1, circuit.gates, circuit.parameter_count)


def _cycle_mode(base: EvaluationMode, shots: int, seed: int) -> EvaluationMode:
    return base if base.is_exact else base.with_shots(shots, seed)


def _final_energy(
    base: EvaluationMode,
    shot_schedule: ShotSchedule,
    state,
    h: PauliSum,
    seed: int,
) -> float:
    """Exact energy, or the average over the final high-shot repeats."""
    if base.is_exact:
        return base.energy(state, h)
    estimates = [
        base.with_shots(shot_schedule.final_shots, fanout_seed(seed, _FINAL, r)).energy(
            state, h
        )
        for r in range(shot_schedule.final_repeats)
    ]
    return float(np.mean(estimates))


def solve_ground(
    h: PauliSum,
    spec: AnsatzSpec,
    optimizer: OptimizerSettings | None = None,
    mode: EvaluationMode | None = None,
    *,
    max_iterations: int = 60,
    convergence_tol: float = 1e-4,
    convergence_window: int = 2,
    shot_schedule: ShotSchedule | None = None,
    seed: int = 0,
    counter: CallCounter | None = None,
    init_theta: np.ndarray | None = None,
) -> GroundResult:
    """Plain VQE for the ground level: minimize the energy of the generated
    state.  Returns the best parameters seen; in exact mode the result is a
    variational upper bound on the true ground energy."""
    optimizer = optimizer or OptimizerSettings()
    mode = mode or EvaluationMode.exact()
    shot_schedule = shot_schedule or ShotSchedule()
    counter = counter if counter is not None else CallCounter()
    circuit = build_generator(spec)

    fast = mode.is_exact and optimizer.name == "rotosolve"
    fast_cost = (
        QuadraticCost(circuit, dense_matrix(h), _basis_zero(spec.qubit_count), [1.0])
        if fast
        else None
    )

    best: GroundResult | None = None
    for restart in range(optimizer.restarts):
        rng = np.random.default_rng(fanout_seed(seed, _RESTART, restart, _INIT))
        if init_theta is not None and restart == 0:
            theta = np.asarray(init_theta, dtype=float).copy()
        else:
            theta = initial_parameters(circuit.parameter_count, rng)
        phase = _PhaseOptimizer(optimizer, circuit)

        mode_0 = _cycle_mode(
            mode, shot_schedule.shots_at(0), fanout_seed(seed, _RESTART, restart, _CYCLE, 0)
        )
        trace = [mode_0.energy(run_circuit(circuit, theta), h)]
        best_theta, best_energy = theta.copy(), trace[0]
        converged = False
        iterations = 0
        for it in range(max_iterations):
            mode_it = _cycle_mode(
                mode,
                shot_schedule.shots_at(it),
                fanout_seed(seed, _RESTART, restart, _CYCLE, it + 1),
            )
            if fast_cost is not None:
                cost = fast_cost
            else:

                def cost(p, mode_it=mode_it):
                    return mode_it.energy(run_circuit(circuit, p), h)

            theta = phase.iterate(cost, theta)
            counter.add("ground", circuit.parameter_count)
            iterations += 1
            energy = cost(theta)
            trace.append(energy)
            if energy < best_energy:
                best_theta, best_energy = theta.copy(), energy
            if _converged(trace, convergence_tol, convergence_window):
                converged = True
                break

        final = _final_energy(
            mode, shot_schedule, run_circuit(circuit, best_theta), h,
            fanout_seed(seed, _RESTART, restart, _GROUND),
        )
        candidate = GroundResult(
            best_theta, final, trace, converged, iterations,
            iterations * circuit.parameter_count, spec,
        )
        if best is None or candidate.energy < best.energy:
            best = candidate
    if not best.converged:
        warnings.warn(
            f"ground solve did not converge in {max_iterations} iterations; "
            f"best energy {best.energy:.8f}",
            stacklevel=2,
        )
    return best


def _embed_parameters(
    old: np.ndarray | None, count: int, rng: np.random.Generator, scale: float = 0.1
) -> np.ndarray:
    """Warm-start vector: copy what fits (layer-major order puts early layers
    first), fill the rest with small random angles."""
    fresh = initial_parameters(count, rng, scale)
    if old is None:
        return fresh
    old = np.asarray(old, dtype=float)
    keep = min(old.size, count)
    fresh[:keep] = old[:keep]
    return fresh


@dataclass(frozen=True)
class LevelSpecs:
    generator: AnsatzSpec
    discriminator: AnsatzSpec


def _known_overlap(ladder: Ladder, generator, theta: np.ndarray) -> float:
    """Largest squared overlap of the generated state with any known level."""
    psi = run_circuit(generator, theta).amplitudes
    return max(
        float(np.abs(np.vdot(s.amplitudes, psi)) ** 2) for s in ladder.known_states()
    )


@dataclass
class _Attempt:
    theta: np.ndarray
    phi: np.ndarray
    trace: list[float]
    cycles: int
    converged: bool
    overlap: float

    @property
    def separated(self) -> bool:
        return self.overlap < OVERLAP_GUARD


OVERLAP_GUARD = 0.5  # a collapsed level sits near 1, a converged one near 0


def solve_excited(
    level: int,
    ladder: Ladder,
    specs: LevelSpecs,
    schedule: Schedule | None = None,
    shot_schedule: ShotSchedule | None = None,
    optimizer: OptimizerSettings | None = None,
    mode: EvaluationMode | None = None,
    *,
    gamma: float,
    seed: int = 0,
    counter: CallCounter | None = None,
    init_theta: np.ndarray | None = None,
    init_phi: np.ndarray | None = None,
    skip_discriminator: bool = False,
    attach_diagnostics: bool = False,
    max_restarts: int = 3,
) -> ExcitedResult:
    """Alternating scheme for one excited level.

    Requires the ladder to hold levels 0..level-1 and a pre-selected gamma.
    Each outer cycle optimizes the Discriminator, then the Generator; the
    per-cycle energy of the generated state forms the convergence trace.

    The adversarial game has a known degenerate trap: when the generated
    state sits inside the span of the known states, the Discriminator's cost
    carries no signal for it and can drift to accept-everything, letting the
    Generator collapse onto an already-found state.  The driver detects that
    through the generated state's overlap with the known levels and reruns
    the level from fresh random parameters (up to ``max_restarts`` times).
    The converged level is appended to the ladder.
    """
    if len(ladder) != level:
        raise ValueError(f"ladder holds {len(ladder)} levels, cannot solve level {level}")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    schedule = schedule or Schedule()
    shot_schedule = shot_schedule or ShotSchedule()
    optimizer = optimizer or OptimizerSettings()
    mode = mode or EvaluationMode.exact()
    counter = counter if counter is not None else CallCounter()

    generator = build_generator(specs.generator)
    discriminator = build_discriminator(specs.discriminator)
    ladder.gamma = gamma
    calls_key = f"level{level}"
    calls_before = counter.total(calls_key)

    fast = mode.is_exact and optimizer.name == "rotosolve"
    if fast:
        h_on_full = np.kron(dense_matrix(ladder.hamiltonian), np.eye(2))
        keep_diag = _ancilla_keep_projector(discriminator.qubit_count)
        gen_on_full = _with_extra_qubit(generator)
        full_zero = _basis_zero(discriminator.qubit_count)
        disc_weights = np.array([1.0] + [-1.0] * len(ladder))

    def run_attempt(attempt: int) -> _Attempt:
        rng = np.random.default_rng(fanout_seed(seed, level, _RESTART, attempt, _INIT))
        if attempt == 0 and init_theta is not None:
            theta = np.asarray(init_theta, dtype=float).copy()
        elif attempt == 0:
            theta = _embed_parameters(
                ladder.levels[-1].theta, generator.parameter_count, rng
            )
        else:
            theta = rng.uniform(-np.pi, np.pi, generator.parameter_count)
        if attempt == 0 and init_phi is not None:
            phi = np.asarray(init_phi, dtype=float).copy()
        else:
            # full-range start: near-identity Discriminators begin inside the
            # accept-everything plateau and train poorly
            phi = rng.uniform(-np.pi, np.pi, discriminator.parameter_count)

        gen_phase = _PhaseOptimizer(optimizer, generator)
        disc_phase = _PhaseOptimizer(optimizer, discriminator)

        def train_discriminator(mode_c) -> None:
            nonlocal phi
            if fast:
                # the generated and known inputs are fixed for the phase
                psi_g = run_circuit(generator, theta)
                disc_cost = QuadraticCost(
                    discriminator,
                    keep_diag,
                    _stack_with_ancilla([psi_g, *ladder.known_states()]),
                    disc_weights,
                )
            else:
                disc_cost = disc_cost_factory(
                    theta, ladder, mode_c, generator, discriminator
                )
            for _ in range(schedule.disc_iters_per_cycle):
                phi = disc_phase.iterate(disc_cost, phi)
                counter.add(calls_key, discriminator.parameter_count)
            if schedule.disc_to_convergence and fast:
                prev = disc_cost(phi)
                for _ in range(schedule.disc_sweep_cap - schedule.disc_iters_per_cycle):
                    phi = disc_phase.iterate(disc_cost, phi)
                    counter.add(calls_key, discriminator.parameter_count)
                    now = disc_cost(phi)
                    if abs(prev - now) < schedule.disc_converge_tol:
                        break
                    prev = now

        def generator_cost(mode_c):
            if fast:
                # energy term plus gamma-weighted acceptance, as one quadratic
                # form over the register with the idle ancilla appended
                d_mat = _dense_unitary(discriminator, phi)
                penalty = d_mat.conj().T @ (keep_diag @ d_mat)
                return QuadraticCost(
                    gen_on_full, h_on_full + gamma * penalty, full_zero, [1.0]
                )
            return gen_cost_factory(phi, ladder, mode_c, generator, discriminator)

        mode_0 = _cycle_mode(
            mode, shot_schedule.shots_at(0), fanout_seed(seed, level, _RESTART, attempt, _CYCLE, 0)
        )
        trace = [mode_0.energy(run_circuit(generator, theta), ladder.hamiltonian)]
        converged = False
        cycles = 0
        for cycle in range(schedule.outer_cycles):
            mode_c = _cycle_mode(
                mode,
                shot_schedule.shots_at(cycle),
                fanout_seed(seed, level, _RESTART, attempt, _CYCLE, cycle + 1),
            )
            if not skip_discriminator:
                train_discriminator(mode_c)
            gen_cost = generator_cost(mode_c)
            for _ in range(schedule.gen_iters_per_cycle):
                theta = gen_phase.iterate(gen_cost, theta)
                counter.add(calls_key, generator.parameter_count)
            if schedule.gen_to_convergence and fast:
                prev = gen_cost(theta)
                for _ in range(schedule.gen_sweep_cap - schedule.gen_iters_per_cycle):
                    theta = gen_phase.iterate(gen_cost, theta)
                    counter.add(calls_key, generator.parameter_count)
                    now = gen_cost(theta)
                    if abs(prev - now) < schedule.gen_converge_tol:
                        break
                    prev = now
            cycles += 1
            trace.append(
                mode_c.energy(run_circuit(generator, theta), ladder.hamiltonian)
            )
            if _converged(trace, schedule.convergence_tol, schedule.convergence_window):
                converged = True
                break

        if schedule.refine_cycles and fast and not skip_discriminator:
            # late-stage polish: small sign-based steps against a fully
            # re-centered Discriminator avoid the long jumps that stall the
            # endgame on larger registers
            rprop = RpropState.fresh(generator.parameter_count, 0.05)
            for cycle in range(schedule.refine_cycles):
                train_discriminator(mode_0)
                gen_cost = generator_cost(mode_0)
                for _ in range(schedule.refine_gen_iters):
                    theta, rprop = rprop_step(
                        gen_cost, theta, rprop,
                        gradient=quadratic_gradient(gen_cost, theta),
                    )
                    counter.add(calls_key, generator.parameter_count)
                cycles += 1
                trace.append(
                    expectation_exact(run_circuit(generator, theta), ladder.hamiltonian)
                )
            converged = _converged(
                trace, schedule.convergence_tol, schedule.convergence_window
            )
        return _Attempt(
            theta, phi, trace, cycles, converged,
            _known_overlap(ladder, generator, theta),
        )

    attempts = [run_attempt(0)]
    while not attempts[-1].separated and len(attempts) <= max_restarts:
        attempts.append(run_attempt(len(attempts)))
    separated = [a for a in attempts if a.separated]
    pool = separated or attempts
    chosen = min(pool, key=lambda a: a.trace[-1])

    theta, phi = chosen.theta, chosen.phi
    trace, cycles = chosen.trace, chosen.cycles
    converged = chosen.converged and bool(separated)
    energy = _final_energy(
        mode, shot_schedule, run_circuit(generator, theta), ladder.hamiltonian,
        fanout_seed(seed, level, _FINAL),
    )

    result = ExcitedResult(
        level=level,
        theta=theta,
        phi=phi,
        energy=energy,
        energy_trace=trace,
        cycles=cycles,
        converged=converged,
        calls=counter.total(calls_key) - calls_before,
        gamma=gamma,
        generator_spec=specs.generator,
        discriminator_spec=specs.discriminator,
    )
    if not converged:
        warnings.warn(
            f"excited level {level} did not converge in {cycles} cycles; "
            f"energy trace tail {trace[-3:]}",
            stacklevel=2,
        )

    top = ladder.levels[-1].energy
    if energy < top - 2 * schedule.convergence_tol:
        result.monotony_warning = (
            f"level {level} energy {energy:.8f} fell below level "
            f"{level - 1} energy {top:.8f}"
        )
        if mode.is_exact:
            result.diagnostics = diagnostics(
                phi, theta, ladder, generator, discriminator
            )
        warnings.warn(result.monotony_warning, stacklevel=2)
    elif attach_diagnostics and mode.is_exact:
        result.diagnostics = diagnostics(phi, theta, ladder, generator, discriminator)

    ladder.append(
        LadderLevel(theta, energy, specs.generator, phi=phi, gamma=gamma),
        monotone_tol=2 * schedule.convergence_tol,
    )
    return result


@dataclass
class LadderResult:
    """A full ground + excited solve of one Hamiltonian."""

    hamiltonian: PauliSum
    ladder: Ladder
    ground: GroundResult
    excited: list[ExcitedResult]
    counter: CallCounter
    seed: int
    mode: str
    oracle: Spectrum | None = None

    @property
    def all_converged(self) -> bool:
        return self.ground.converged and all(r.converged for r in self.excited)

    def energies(self) -> np.ndarray:
        return self.ladder.energies()

    def level_rows(self) -> list[dict]:
        rows = []
        for lv, level in enumerate(self.ladder.levels):
            oracle_e = self.oracle.energy(lv) if self.oracle is not None else None
            if lv == 0:
                converged, cycles, calls, gamma = (
                    self.ground.converged, self.ground.iterations, self.ground.calls, None,
                )
            else:
                r = self.excited[lv - 1]
                converged, cycles, calls, gamma = r.converged, r.cycles, r.calls, r.gamma
            rows.append(
                {
                    "level": lv,
                    "energy": level.energy,
                    "oracle": oracle_e,
                    "abs_error": abs(level.energy - oracle_e) if oracle_e is not None else None,
                    "gamma": gamma,
                    "converged": converged,
                    "cycles": cycles,
                    "calls": calls,
                }
            )
        return rows

    def to_json_dict(self) -> dict:
        levels = []
        for lv, level in enumerate(self.ladder.levels):
            entry = {
                "level": lv,
                "energy": level.energy,
                "theta": level.theta.tolist(),
                "phi": level.phi.tolist() if level.phi is not None else None,
                "gamma": level.gamma,
            }
            if lv == 0:
                entry["energy_trace"] = self.ground.energy_trace
                entry["converged"] = self.ground.converged
            else:
                r = self.excited[lv - 1]
                entry["energy_trace"] = r.energy_trace
                entry["converged"] = r.converged
                if r.diagnostics is not None:
                    entry["diagnostics"] = {
                        "acceptance": r.diagnostics.acceptance.tolist(),
                        "cross_magnitudes": r.diagnostics.cross_magnitudes.tolist(),
                    }
                if r.monotony_warning:
                    entry["warning"] = r.monotony_warning
            if self.oracle is not None:
                entry["oracle_energy"] = self.oracle.energy(lv)
                entry["abs_error"] = abs(level.energy - self.oracle.energy(lv))
            levels.append(entry)
        return {
            "schema": 1,
            "mode": self.mode,
            "seed": self.seed,
            "qubit_count": self.hamiltonian.qubit_count,
            "levels": levels,
            "total_calls": self.counter.total(),
            "calls": dict(sorted(self.counter.counts.items())),
        }

    def write(self, out_dir: str | Path, stem: str = "ladder") -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.json").write_text(
            json.dumps(self.to_json_dict(), indent=2) + "\n"
        )
        (out / f"{stem}.csv").write_text(
            _csv_text(
                ["level", "energy", "oracle", "abs_error", "gamma", "converged", "cycles", "calls"],
                self.level_rows(),
            )
        )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _csv_text(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _build_mode(settings: RunSettings, h: PauliSum, seed: int) -> EvaluationMode:
    if settings.mode == "exact":
        return EvaluationMode.exact()
    mitigator = None
    if settings.mitigation:
        if settings.noise is None:
            raise ValueError("mitigation requested but no noise model given")
        mitigator = Mitigator.calibrated(
            settings.noise,
            (h.qubit_count, h.qubit_count + 1),
            settings.calibration_shots,
            fanout_seed(seed, _CALIBRATION),
        )
    return EvaluationMode.sampled(
        settings.shot_schedule.final_shots,
        settings.noise,
        fanout_seed(seed, _INIT),
        mitigator,
    )


def solve_ladder(
    h: PauliSum,
    settings: RunSettings,
    levels: int,
    seed: int = 0,
    warm: LadderResult | None = None,
    reduced: bool = False,
) -> LadderResult:
    """Ground state plus ``levels - 1`` excited states of one Hamiltonian.

    With ``warm`` given, parameters seed from the matching levels of the
    donor result; with ``reduced`` additionally set, the schedule shrinks to
    a warm-start refresh (one working cycle plus a convergence probe, with
    Discriminator retraining subject to the warm-start settings).
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    counter = CallCounter()
    mode = _build_mode(settings, h, seed)
    ansatz = settings.ansatz_for(h.qubit_count)
    oracle = exact_spectrum(h) if h.qubit_count <= QUBIT_GUARD else None

    schedule = settings.schedule
    window = schedule.convergence_window
    if reduced:
        cycles = settings.warm_start.reduced_outer_cycles
        schedule = Schedule(
            schedule.disc_iters_per_cycle,
            schedule.gen_iters_per_cycle,
            cycles,
            schedule.convergence_tol,
            1,
        )
        window = 1

    ground_spec = ansatz.generator_spec(h.qubit_count, 0)
    ground_iters = (
        schedule.outer_cycles
        if reduced
        else schedule.outer_cycles * schedule.gen_iters_per_cycle
    )
    ground = solve_ground(
        h,
        ground_spec,
        settings.optimizer if not reduced else OptimizerSettings(settings.optimizer.name, 1, settings.optimizer.rprop_initial_step),
        mode,
        max_iterations=ground_iters,
        convergence_tol=schedule.convergence_tol,
        convergence_window=window,
        shot_schedule=settings.shot_schedule,
        seed=fanout_seed(seed, _GROUND),
        counter=counter,
        init_theta=warm.ladder.levels[0].theta if warm is not None else None,
    )
    ladder = Ladder(h)
    ladder.append(LadderLevel(ground.theta, ground.energy, ground_spec))

    excited: list[ExcitedResult] = []
    for level in range(1, levels):
        specs = LevelSpecs(
            ansatz.generator_spec(h.qubit_count, level),
            ansatz.discriminator_spec(h.qubit_count, level),
        )
        if settings.gamma.override is not None:
            gamma = settings.gamma.override
        else:
            gamma = select_gamma(
                h,
                level,
                settings.gamma.method,
                settings.gamma.safety,
                e_min=ground.energy if settings.gamma.method == "inverse_vqe" else None,
                sampled_cap=settings.gamma.cap_always
                or (settings.mode == "sampled" and settings.gamma.sampled_cap),
            )
        warm_level = (
            warm.ladder.levels[level]
            if warm is not None and len(warm.ladder.levels) > level
            else None
        )
        result = solve_excited(
            level,
            ladder,
            specs,
            schedule,
            settings.shot_schedule,
            settings.optimizer,
            mode,
            gamma=gamma,
            seed=fanout_seed(seed, _POINT, level),
            counter=counter,
            init_theta=warm_level.theta if warm_level is not None else None,
            init_phi=(
                warm_level.phi
                if warm_level is not None and warm_level.phi is not None
                and warm_level.phi.size == build_discriminator(specs.discriminator).parameter_count
                else None
            ),
            skip_discriminator=reduced and not settings.warm_start.retrain_discriminator,
            max_restarts=0 if reduced else settings.level_restarts,
        )
        excited.append(result)

    return LadderResult(
        hamiltonian=h,
        ladder=ladder,
        ground=ground,
        excited=excited,
        counter=counter,
        seed=seed,
        mode=settings.mode,
        oracle=oracle,
    )


@dataclass
class PointReport:
    distance: float
    path: str
    result: LadderResult | None
    error: str | None = None
    warm_from: float | None = None
    retried: bool = False

    @property
    def failed(self) -> bool:
        return self.result is None

    @property
    def converged(self) -> bool:
        return self.result is not None and self.result.all_converged


@dataclass
class SweepReport:
    plan: SweepPlan
    points: list[PointReport]
    seed: int
    mode: str

    @property
    def any_failed(self) -> bool:
        return any(p.failed for p in self.points)

    def rows(self) -> list[dict]:
        out = []
        for p in self.points:
            if p.result is None:
                out.append(
                    {
                        "distance": p.distance,
                        "level": None,
                        "energy": None,
                        "oracle": None,
                        "abs_error": None,
                        "converged": False,
                    }
                )
                continue
            for row in p.result.level_rows():
                out.append(
                    {
                        "distance": p.distance,
                        "level": row["level"],
                        "energy": row["energy"],
                        "oracle": row["oracle"],
                        "abs_error": row["abs_error"],
                        "converged": row["converged"],
                    }
                )
        return out

    def error_rows(self) -> list[dict]:
        by_level: dict[int, list[float]] = {}
        for row in self.rows():
            if row["abs_error"] is not None:
                by_level.setdefault(row["level"], []).append(row["abs_error"])
        return [
            {
                "level": lv,
                "mean_abs_error": float(np.mean(errs)),
                "max_abs_error": float(np.max(errs)),
                "points": len(errs),
            }
            for lv, errs in sorted(by_level.items())
        ]

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "mode": self.mode,
            "seed": self.seed,
            "anchor_distance": self.plan.anchor_distance,
            "points": [
                {
                    "distance": p.distance,
                    "hamiltonian": p.path,
                    "failed": p.failed,
                    "error": p.error,
                    "warm_from": p.warm_from,
                    "retried": p.retried,
                    "ladder": p.result.to_json_dict() if p.result else None,
                }
                for p in self.points
            ],
        }

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.json").write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")
        (out / "sweep.csv").write_text(
            _csv_text(
                ["distance", "level", "energy", "oracle", "abs_error", "converged"],
                self.rows(),
            )
        )
        (out / "errors_by_level.csv").write_text(
            _csv_text(
                ["level", "mean_abs_error", "max_abs_error", "points"],
                self.error_rows(),
            )
        )
        for p in self.points:
            if p.result is not None:
                p.result.write(out, stem=f"ladder_{p.distance:g}")


def sweep(plan: SweepPlan, settings: RunSettings, seed: int = 0) -> SweepReport:
    """Process a dissociation scan outward from the anchor point.

    The anchor gets the full schedule; every other distance warm-starts from
    its nearest already-solved neighbour with a reduced schedule, falling
    back to the full schedule (Discriminator retraining included) when the
    quick pass does not converge.  Failures are recorded and the sweep
    continues.
    """
    distances = list(plan.bond_distances)
    order = sorted(distances, key=lambda d: (abs(d - plan.anchor_distance), d))
    solved: dict[float, LadderResult] = {}
    reports: dict[float, PointReport] = {}

    for idx, d in enumerate(order):
        path = plan.hamiltonian_files[d]
        point_seed = fanout_seed(seed, _POINT, idx)
        try:
            h = load_hamiltonian(path)
            if d == plan.anchor_distance or not solved or not settings.warm_start.enabled:
                result = solve_ladder(h, settings, plan.levels, point_seed)
                warm_from = None
                retried = False
            else:
                warm_from = min(solved, key=lambda s: (abs(s - d), s))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    result = solve_ladder(
                        h, settings, plan.levels, point_seed,
                        warm=solved[warm_from], reduced=True,
                    )
                retried = False
                if not result.all_converged:
                    result = solve_ladder(
                        h, settings, plan.levels, fanout_seed(point_seed, _RESTART),
                        warm=solved[warm_from], reduced=False,
                    )
                    retried = True
            solved[d] = result
            reports[d] = PointReport(d, str(path), result, warm_from=warm_from, retried=retried)
        except Exception as exc:  # per-point failures must not kill the sweep
            reports[d] = PointReport(d, str(path), None, error=f"{type(exc).__name__}: {exc}")

    return SweepReport(
        plan, [reports[d] for d in distances], seed, settings.mode
    )
