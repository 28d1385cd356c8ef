"""Parameter optimizers for rotation-gate circuits.

Costs built from exp(-i*theta*sigma/2) rotations are single-frequency
sinusoids in each angle, which gives two specialised updates: Rotosolve jumps
each coordinate straight to the restricted minimum from three evaluations,
and the parameter-shift rule turns two evaluations into an exact derivative
for sign-based Rprop steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

__all__ = [
    "RotosolveState",
    "RpropState",
    "parameter_shift_gradient",
    "parameter_shift_gradient_all",
    "rotosolve_update",
    "rotosolve_sweep",
    "rprop_step",
]

Cost = Callable[[np.ndarray], float]

SHIFT = math.pi / 2


def parameter_shift_gradient(cost: Cost, params, index: int) -> float:
    """Exact derivative wrt one angle: (C(t + pi/2) - C(t - pi/2)) / 2."""
    params = np.asarray(params, dtype=float)
    shifted = params.copy()
    shifted[index] += SHIFT
    plus = cost(shifted)
    shifted[index] = params[index] - SHIFT
    minus = cost(shifted)
    return 0.5 * (plus - minus)


def parameter_shift_gradient_all(cost: Cost, params) -> np.ndarray:
    """Parameter-shift derivative for every index.

    Entries are independent of each other, so callers are free to evaluate
    them concurrently; this reference implementation is sequential.
    """
    params = np.asarray(params, dtype=float)
    return np.array(
        [parameter_shift_gradient(cost, params, i) for i in range(params.size)]
    )


@dataclass(frozen=True)
class RotosolveState:
    """Sweep bookkeeping: the coordinate visit order.  Each coordinate update
    costs exactly EVALUATIONS_PER_UPDATE cost calls."""

    sweep_order: tuple[int, ...]

    EVALUATIONS_PER_UPDATE = 3


def _wrap_angle(x: float) -> float:
    """Map to (-pi, pi]."""
    w = (x + math.pi) % (2.0 * math.pi) - math.pi
    return math.pi if w == -math.pi else w


def rotosolve_update(theta: float, here: float, plus: float, minus: float) -> float:
    """Closed-form minimizer of the single-coordinate sinusoid.

    Given the cost at theta and at theta +- pi/2, the restricted cost
    a*sin(t + b) + c is identified and its global minimum returned, wrapped
    to (-pi, pi].  A flat coordinate (no sinusoid amplitude) stays put.
    """
    y = 2.0 * here - plus - minus
    x = plus - minus
    if abs(x) < 1e-12 and abs(y) < 1e-12:
        return theta
    return _wrap_angle(theta - SHIFT - math.atan2(y, x))


def rotosolve_sweep(
    cost: Cost,
    params,
    state: RotosolveState | None = None,
) -> np.ndarray:
    """One full coordinate-descent sweep.

    For each coordinate the cost is C(t) = a*sin(t + b) + c; three probes at
    t, t + pi/2 and t - pi/2 identify the sinusoid and the coordinate jumps
    to its global minimum:

        t* = t - pi/2 - atan2(2*C(t) - C(t+pi/2) - C(t-pi/2),
                              C(t+pi/2) - C(t-pi/2))

    wrapped back to (-pi, pi].  In exact mode the cost never increases.
    Coordinates are visited in ascending order unless a state overrides it.
    """
    params = np.asarray(params, dtype=float).copy()
    order = state.sweep_order if state is not None else range(params.size)
    for i in order:
        theta = params[i]
        here = cost(params)
        params[i] = theta + SHIFT
        plus = cost(params)
        params[i] = theta - SHIFT
        minus = cost(params)
        params[i] = rotosolve_update(theta, here, plus, minus)
    return params


@dataclass(frozen=True)
class RpropState:
    """Per-parameter adaptive step sizes and the previous gradient signs."""

    step_sizes: np.ndarray
    prev_gradient: np.ndarray
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    step_min: float = 1e-6
    step_max: float = 1.0

    @classmethod
    def fresh(cls, parameter_count: int, initial_step: float = 0.1, **kwargs) -> "RpropState":
        return cls(
            step_sizes=np.full(parameter_count, initial_step),
            prev_gradient=np.zeros(parameter_count),
            **kwargs,
        )


def rprop_step(
    cost: Cost,
    params,
    state: RpropState,
    gradient: np.ndarray | None = None,
) -> tuple[np.ndarray, RpropState]:
    """One sign-based resilient update.

    Where the gradient keeps its sign the step grows by eta_plus (capped at
    step_max); where it flips the step shrinks by eta_minus (floored at
    step_min), the gradient memory resets and that parameter does not move
    this iteration.  Parameters move by -sign(g) * step.  A precomputed
    gradient can be passed in to reuse evaluations.
    """
    params = np.asarray(params, dtype=float)
    g = parameter_shift_gradient_all(cost, params) if gradient is None else np.asarray(gradient, dtype=float)
    product = g * state.prev_gradient
    steps = state.step_sizes.copy()
    steps[product > 0.0] = np.minimum(steps[product > 0.0] * state.eta_plus, state.step_max)
    steps[product < 0.0] = np.maximum(steps[product < 0.0] * state.eta_minus, state.step_min)
    effective = g.copy()
    effective[product < 0.0] = 0.0
    new_params = params - np.sign(effective) * steps
    return new_params, replace(state, step_sizes=steps, prev_gradient=effective)
