"""Hardware-efficient circuit builders for the Generator and Discriminator.

A layer is one rotation per named axis on every qubit followed by an
entangling ladder between nearest neighbours.  The Discriminator uses the
same layout on the system register plus one ancilla (the highest-indexed
qubit).  Depth schedules map excitation level to layer counts and keep
growing by two layers per level past their last explicit entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .simulator import Circuit, Entangler, Rotation

__all__ = [
    "AnsatzSpec",
    "DepthSchedule",
    "build_generator",
    "build_discriminator",
    "depth_for_level",
    "h2_depth_schedule",
    "lih_depth_schedule",
    "initial_parameters",
]

DEPTH_GROWTH_PER_LEVEL = 2


@dataclass(frozen=True)
class AnsatzSpec:
    """Layered ansatz shape: rotations per axis on every qubit, then a
    nearest-neighbour entangler ladder, repeated ``layers`` times."""

    qubit_count: int
    layers: int
    axes_per_layer: tuple[str, ...] = ("Y", "X")

    def __post_init__(self):
        axes = tuple(self.axes_per_layer)
        object.__setattr__(self, "axes_per_layer", axes)
        if self.qubit_count < 1 or self.layers < 1:
            raise ValueError("qubit_count and layers must be >= 1")
        if not axes or len(set(axes)) != len(axes) or any(a not in "XYZ" for a in axes):
            raise ValueError(f"axes_per_layer must be distinct letters from X/Y/Z, got {axes}")

    @property
    def parameter_count(self) -> int:
        return self.layers * self.qubit_count * len(self.axes_per_layer)

    def with_layers(self, layers: int) -> "AnsatzSpec":
        return AnsatzSpec(self.qubit_count, layers, self.axes_per_layer)


def _build(spec: AnsatzSpec) -> Circuit:
    n = spec.qubit_count
    n_axes = len(spec.axes_per_layer)
    gates: list[Rotation | Entangler] = []
    for layer in range(spec.layers):
        for axis_pos, axis in enumerate(spec.axes_per_layer):
            for qubit in range(n):
                index = (layer * n + qubit) * n_axes + axis_pos
                gates.append(Rotation(axis, qubit, index))
        for qubit in range(n - 1):
            gates.append(Entangler(qubit, qubit + 1))
    return Circuit(n, tuple(gates), spec.parameter_count)


def build_generator(spec: AnsatzSpec) -> Circuit:
    """Generator circuit on the system register.

    Parameter indices run layer-major, qubit-minor with the axis position
    innermost, independent of gate emission order.
    """
    return _build(spec)


def build_discriminator(spec: AnsatzSpec) -> Circuit:
    """Discriminator circuit; ``spec.qubit_count`` counts system + ancilla.

    The ancilla participates in the rotations and the entangler ladder like
    any other qubit.
    """
    if spec.qubit_count < 2:
        raise ValueError("discriminator needs at least one system qubit plus the ancilla")
    return _build(spec)


@dataclass(frozen=True)
class DepthSchedule:
    """Layer counts per excitation level for both circuits.

    Levels past the last explicit entry gain two layers per level; levels
    below the first explicit entry reuse it.
    """

    generator_layers_by_level: dict[int, int] = field(default_factory=dict)
    discriminator_layers_by_level: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for name, table in (
            ("generator", self.generator_layers_by_level),
            ("discriminator", self.discriminator_layers_by_level),
        ):
            if not table:
                raise ValueError(f"{name} schedule is empty")
            keys = sorted(table)
            values = [table[k] for k in keys]
            if any(b < a for a, b in zip(values, values[1:])):
                raise ValueError(f"{name} layer counts must be non-decreasing in level")


def _lookup(table: dict[int, int], level: int) -> int:
    keys = sorted(table)
    if level <= keys[0]:
        return table[keys[0]]
    if level >= keys[-1]:
        return table[keys[-1]] + DEPTH_GROWTH_PER_LEVEL * (level - keys[-1])
    below = max(k for k in keys if k <= level)
    return table[below]


def depth_for_level(schedule: DepthSchedule, level: int) -> tuple[int, int]:
    """(generator layers, discriminator layers) for one excitation level."""
    if level < 0:
        raise ValueError("level must be >= 0")
    return (
        _lookup(schedule.generator_layers_by_level, level),
        _lookup(schedule.discriminator_layers_by_level, level),
    )


def h2_depth_schedule() -> DepthSchedule:
    """Two-qubit preset: generator depth 2 throughout, discriminator depth 3
    for the first excited state and 4 for the second and third."""
    return DepthSchedule(
        generator_layers_by_level={0: 2, 1: 2, 2: 2, 3: 2},
        discriminator_layers_by_level={1: 3, 2: 4, 3: 4},
    )


def lih_depth_schedule() -> DepthSchedule:
    """Four-qubit preset: generator depth 4 up to the third excited state,
    discriminator 6 then 8; both keep growing past level 3."""
    return DepthSchedule(
        generator_layers_by_level={0: 4, 1: 4, 2: 4, 3: 4},
        discriminator_layers_by_level={1: 6, 2: 8, 3: 8},
    )


def initial_parameters(
    count: int, rng: np.random.Generator, scale: float = 0.1
) -> np.ndarray:
    """Small uniform random starting angles in [-scale, scale]."""
    return rng.uniform(-scale, scale, size=count)
