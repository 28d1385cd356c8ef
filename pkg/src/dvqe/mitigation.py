"""Readout-error model, calibration and histogram unfolding.

A measured register suffers independent per-qubit bit flips.  Calibration
prepares every computational basis state, measures it through the noisy
readout and collects the outcome frequencies into a column-stochastic
confusion matrix.  Raw histograms are then corrected by solving a
sum-constrained least-squares problem against that matrix.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ReadoutNoise",
    "ShotHistogram",
    "ConfusionMatrix",
    "MitigationWarning",
    "calibrate",
    "mitigate",
]


class MitigationWarning(UserWarning):
    """Raised as a warning when the unfolding solve needs regularization."""


@dataclass(frozen=True)
class ReadoutNoise:
    """Independent per-qubit readout flips.

    ``p01[q]`` is the probability of reading 1 when qubit ``q`` is truly 0,
    ``p10[q]`` the probability of reading 0 when it is truly 1.  Both must
    stay below 0.5 so the readout remains informative.
    """

    p01: tuple[float, ...]
    p10: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p01", tuple(float(p) for p in self.p01))
        object.__setattr__(self, "p10", tuple(float(p) for p in self.p10))
        if len(self.p01) != len(self.p10):
            raise ValueError("p01 and p10 must have one entry per qubit")
        for p in (*self.p01, *self.p10):
            if not (0.0 <= p < 0.5):
                raise ValueError(f"flip probability {p} outside [0, 0.5)")

    @classmethod
    def uniform(cls, qubit_count: int, p: float, p10: float | None = None) -> "ReadoutNoise":
        """Same flip probability on every qubit (symmetric unless p10 given)."""
        q = p if p10 is None else p10
        return cls((p,) * qubit_count, (q,) * qubit_count)

    @property
    def qubit_count(self) -> int:
        return len(self.p01)

    def single_qubit_matrix(self, qubit: int) -> np.ndarray:
        """2x2 column-stochastic matrix: column j = P(read i | true j)."""
        a, b = self.p01[qubit], self.p10[qubit]
        return np.array([[1.0 - a, b], [a, 1.0 - b]])

    def transition_matrix(self) -> np.ndarray:
        """Exact full-register confusion matrix (Kronecker product of qubits).

        Qubit 0 is the most significant bit of the basis-state index, so it
        comes first in the Kronecker chain.
        """
        m = np.array([[1.0]])
        for q in range(self.qubit_count):
            m = np.kron(m, self.single_qubit_matrix(q))
        return m

    def corrupt_counts(self, counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Push a histogram of true outcomes through the noisy readout.

        Each of the ``counts[j]`` shots lands on a measured state drawn from
        the model's transition column ``j``; equivalent to flipping every bit
        of every shot independently.
        """
        t = self.transition_matrix()
        out = np.zeros_like(counts)
        for j in np.flatnonzero(counts):
            out += rng.multinomial(int(counts[j]), t[:, j])
        return out


@dataclass
class ShotHistogram:
    """Raw bitstring counts from a measurement run.

    Keys are bitstrings with qubit 0 leftmost, e.g. ``"01"`` means qubit 0
    read 0 and qubit 1 read 1.
    """

    counts: dict[str, int]
    shots: int

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.shots:
            raise ValueError(f"counts sum to {total}, expected {self.shots}")

    @classmethod
    def from_vector(cls, vec: np.ndarray, qubit_count: int) -> "ShotHistogram":
        counts = {
            format(i, f"0{qubit_count}b"): int(c)
            for i, c in enumerate(vec)
            if c
        }
        return cls(counts, int(np.sum(vec)))

    def to_vector(self, qubit_count: int) -> np.ndarray:
        vec = np.zeros(2**qubit_count)
        for bits, c in self.counts.items():
            if len(bits) != qubit_count:
                raise ValueError(f"bitstring {bits!r} does not have {qubit_count} bits")
            vec[int(bits, 2)] = c
        return vec


@dataclass
class ConfusionMatrix:
    """Empirical readout confusion matrix.

    ``matrix[i, j]`` estimates P(measured basis state i | prepared state j);
    columns are non-negative and sum to one.
    """

    qubit_count: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        dim = 2**self.qubit_count
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {self.matrix.shape}, expected {(dim, dim)}")

    def to_json(self) -> str:
        return json.dumps(
            {"qubit_count": self.qubit_count, "matrix": self.matrix.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "ConfusionMatrix":
        doc = json.loads(text)
        return cls(int(doc["qubit_count"]), np.array(doc["matrix"], dtype=float))


def calibrate(
    qubit_count: int,
    shots: int,
    noise: ReadoutNoise,
    rng_seed: int | np.random.Generator = 0,
) -> ConfusionMatrix:
    """Estimate the confusion matrix from basis-state preparation runs.

    Preparing basis state j (a layer of bit-flip gates on |0...0>) yields j
    exactly, so each calibration run reduces to sampling the readout noise;
    column j of the result is the empirical distribution of measured states
    over ``shots`` repetitions.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if noise.qubit_count != qubit_count:
        raise ValueError("noise model qubit count mismatch")
    rng = np.random.default_rng(rng_seed)
    dim = 2**qubit_count
    m = np.zeros((dim, dim))
    prepared = np.zeros(dim, dtype=np.int64)
    for j in range(dim):
        prepared[:] = 0
        prepared[j] = shots
        m[:, j] = noise.corrupt_counts(prepared, rng) / shots
    return ConfusionMatrix(qubit_count, m)


def mitigate(
    y: ShotHistogram | np.ndarray,
    m: ConfusionMatrix,
    clip_negative: bool = True,
) -> np.ndarray:
    """Unfold a raw histogram through the confusion matrix.

    Solves ``min_x ||y - M x||^2`` subject to ``sum(x) = sum(y)`` via the KKT
    system, then (by default) clips negative pseudo-counts to zero and
    rescales so the total is preserved.  Set ``clip_negative=False`` for the
    bare constrained solve.
    """
    dim = 2**m.qubit_count
    if isinstance(y, ShotHistogram):
        y_vec = y.to_vector(m.qubit_count)
    else:
        y_vec = np.asarray(y, dtype=float)
        if y_vec.shape != (dim,):
            raise ValueError(f"histogram length {y_vec.shape}, expected ({dim},)")
    total = float(y_vec.sum())

    a = m.matrix.T @ m.matrix
    rhs = m.matrix.T @ y_vec
    kkt = np.zeros((dim + 1, dim + 1))
    kkt[:dim, :dim] = 2.0 * a
    kkt[:dim, dim] = 1.0
    kkt[dim, :dim] = 1.0
    vec = np.append(2.0 * rhs, total)
    try:
        cond = np.linalg.cond(kkt)
        if not np.isfinite(cond) or cond > 1e12:
            raise np.linalg.LinAlgError(f"ill-conditioned KKT system (cond={cond:.3g})")
        x = np.linalg.solve(kkt, vec)[:dim]
    except np.linalg.LinAlgError as exc:
        warnings.warn(
            f"confusion matrix unfolding needed regularization: {exc}",
            MitigationWarning,
            stacklevel=2,
        )
        kkt[:dim, :dim] += 1e-9 * np.eye(dim)
        x = np.linalg.solve(kkt, vec)[:dim]

    if clip_negative and np.any(x < 0.0):
        x = np.clip(x, 0.0, None)
        s = x.sum()
        if s > 0.0:
            x *= total / s
        else:
            x = np.full(dim, total / dim)
    return x
