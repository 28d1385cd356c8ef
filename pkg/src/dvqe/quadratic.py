"""Fast exact-mode coordinate descent for quadratic circuit costs.

Every exact-mode cost in this package is a weighted quadratic form

    C(params) = sum_s w_s <x_s| U(params)^dag M U(params) |x_s>

with a fixed Hermitian observable M and fixed input states x_s.  A Rotosolve
sweep then does not need three full circuit runs per coordinate: walking the
gates in circuit order while keeping the inputs advanced up to the current
gate and the observable back-propagated through the gates behind it turns
each coordinate update into three small contractions.

The sweep visits rotation gates in circuit order (not parameter-index
order); the update rule itself is shared with the generic optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import simulator
from .optim import SHIFT, rotosolve_update
from .simulator import Circuit, Entangler, Rotation, _bit_mask, _pair_mask, apply_circuit_batch

__all__ = ["QuadraticCost", "gate_sweep_order", "rotosolve_sweep_quadratic"]


def _entangler_forward(states: np.ndarray, n: int, control: int, target: int) -> None:
    if simulator.ENTANGLER_GATE == "CZ":
        states[:, _pair_mask(n, control, target)] *= -1.0
    else:  # CNOT: an involutive permutation of basis states
        perm = _cnot_permutation(n, control, target)
        states[:, :] = states[:, perm]


def _cnot_permutation(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n)
    return np.where(_bit_mask(n, control), idx ^ (1 << (n - 1 - target)), idx)


def gate_sweep_order(circuit: Circuit) -> tuple[int, ...]:
    """Parameter indices in the order their rotation gates appear."""
    return tuple(g.parameter_index for g in circuit.gates if isinstance(g, Rotation))


@dataclass
class QuadraticCost:
    """cost(params) = sum_s weights[s] * <inputs[s]|U^dag observable U|inputs[s]>."""

    circuit: Circuit
    observable: np.ndarray
    inputs: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        dim = 2**self.circuit.qubit_count
        self.observable = np.asarray(self.observable, dtype=complex)
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=complex))
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if self.observable.shape != (dim, dim):
            raise ValueError(f"observable shape {self.observable.shape}, expected {(dim, dim)}")
        if self.inputs.shape[1] != dim or self.inputs.shape[0] != self.weights.size:
            raise ValueError("inputs/weights shape mismatch")

    def __call__(self, params) -> float:
        out = apply_circuit_batch(self.circuit, params, self.inputs)
        values = np.einsum("sd,de,se->s", out.conj(), self.observable, out).real
        return float(self.weights @ values)


def _rotation_unitary(axis: str, angle: float) -> np.ndarray:
    c, s = np.cos(0.5 * angle), np.sin(0.5 * angle)
    if axis == "Z":
        return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]])
    if axis == "Y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _apply_u_rows(block: np.ndarray, n: int, qubit: int, u: np.ndarray) -> None:
    """In place, left-multiply each row-state of a (batch, 2^n) block by u."""
    post = 2 ** (n - 1 - qubit)
    view = block.reshape(-1, 2, post)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    view[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def _conjugate_rotation(a: np.ndarray, n: int, qubit: int, u: np.ndarray) -> None:
    """A <- u^dag A u for a single-qubit u acting on `qubit`, in place."""
    dim = a.shape[0]
    # left factor: rows of A transform with u^dag
    rows = a.reshape(-1, 2, 2 ** (n - 1 - qubit), dim)
    r0 = rows[:, 0].copy()
    r1 = rows[:, 1]
    udag = u.conj().T
    rows[:, 0] = udag[0, 0] * r0 + udag[0, 1] * r1
    rows[:, 1] = udag[1, 0] * r0 + udag[1, 1] * r1
    # right factor: columns of A transform with u
    cols = a.reshape(dim, -1, 2, 2 ** (n - 1 - qubit))
    c0 = cols[:, :, 0].copy()
    c1 = cols[:, :, 1]
    cols[:, :, 0] = c0 * u[0, 0] + c1 * u[1, 0]
    cols[:, :, 1] = c0 * u[0, 1] + c1 * u[1, 1]


def _conjugate_entangler(a: np.ndarray, n: int, control: int, target: int) -> None:
    """A <- E^dag A E in place for the self-inverse entangler."""
    if simulator.ENTANGLER_GATE == "CZ":
        mask = _pair_mask(n, control, target)
        a[mask, :] *= -1.0
        a[:, mask] *= -1.0
    else:
        perm = _cnot_permutation(n, control, target)
        a[:, :] = a[perm][:, perm]


def quadratic_gradient(qc: QuadraticCost, params) -> np.ndarray:
    """All parameter-shift derivatives from one backward and one forward pass.

    Uses the same cached-observable walk as the sweep, but evaluates each
    rotation at +-pi/2 around its current angle without moving it.
    """
    circuit = qc.circuit
    n = circuit.qubit_count
    params = np.asarray(params, dtype=float)
    grad = np.zeros_like(params)

    behind: dict[int, np.ndarray] = {}
    a = qc.observable.copy()
    for i in range(len(circuit.gates) - 1, -1, -1):
        g = circuit.gates[i]
        if isinstance(g, Rotation):
            behind[i] = a.copy()
            _conjugate_rotation(
                a, n, g.qubit, _rotation_unitary(g.axis, params[g.parameter_index])
            )
        else:
            _conjugate_entangler(a, n, g.control, g.target)

    states = qc.inputs.copy()
    for i, g in enumerate(circuit.gates):
        if isinstance(g, Entangler):
            _entangler_forward(states, n, g.control, g.target)
            continue
        a_i = behind[i]
        theta = params[g.parameter_index]

        def probe(angle: float) -> float:
            trial = states.copy()
            _apply_u_rows(trial, n, g.qubit, _rotation_unitary(g.axis, angle))
            vals = np.einsum("sd,de,se->s", trial.conj(), a_i, trial).real
            return float(qc.weights @ vals)

        grad[g.parameter_index] = 0.5 * (probe(theta + SHIFT) - probe(theta - SHIFT))
        _apply_u_rows(states, n, g.qubit, _rotation_unitary(g.axis, theta))
    return grad


def rotosolve_sweep_quadratic(qc: QuadraticCost, params) -> np.ndarray:
    """One Rotosolve sweep over the circuit's rotation gates in gate order.

    A backward pass conjugates the observable through the gates so that every
    rotation sees the operator behind it; the forward pass advances the input
    states gate by gate, probing each angle at (t, t + pi/2, t - pi/2) via
    three small contractions and jumping to the restricted minimum.
    """
    circuit = qc.circuit
    n = circuit.qubit_count
    params = np.asarray(params, dtype=float).copy()

    # backward pass: behind[i] = observable conjugated through gates i+1..end
    behind: dict[int, np.ndarray] = {}
    a = qc.observable.copy()
    for i in range(len(circuit.gates) - 1, -1, -1):
        g = circuit.gates[i]
        if isinstance(g, Rotation):
            behind[i] = a.copy()
            _conjugate_rotation(
                a, n, g.qubit, _rotation_unitary(g.axis, params[g.parameter_index])
            )
        else:
            _conjugate_entangler(a, n, g.control, g.target)

    # forward pass: advance inputs, updating each rotation as it is reached
    states = qc.inputs.copy()
    for i, g in enumerate(circuit.gates):
        if isinstance(g, Entangler):
            _entangler_forward(states, n, g.control, g.target)
            continue
        a_i = behind[i]
        theta = params[g.parameter_index]

        def probe(angle: float) -> float:
            trial = states.copy()
            _apply_u_rows(trial, n, g.qubit, _rotation_unitary(g.axis, angle))
            vals = np.einsum("sd,de,se->s", trial.conj(), a_i, trial).real
            return float(qc.weights @ vals)

        here = probe(theta)
        plus = probe(theta + SHIFT)
        minus = probe(theta - SHIFT)
        best = rotosolve_update(theta, here, plus, minus)
        params[g.parameter_index] = best
        _apply_u_rows(states, n, g.qubit, _rotation_unitary(g.axis, best))
    return params
