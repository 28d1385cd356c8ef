"""Discriminative VQE on a dense statevector simulator.

Ground states come from a plain variational eigensolver; each excited state
is found by a Generator circuit minimizing energy plus a weighted penalty
while a Discriminator circuit learns to tell the generated state apart from
every eigenstate already found.  Exact and shot-sampled evaluation, readout
error mitigation, Rotosolve/Rprop optimizers and warm-started dissociation
sweeps are included, all checked against a dense diagonalization oracle.
"""

from .ansatz import (
    AnsatzSpec,
    DepthSchedule,
    build_discriminator,
    build_generator,
    depth_for_level,
    h2_depth_schedule,
    lih_depth_schedule,
)
from .driver import (
    AnsatzSettings,
    CallCounter,
    GammaSettings,
    LevelSpecs,
    OptimizerSettings,
    RunSettings,
    Schedule,
    ShotSchedule,
    SweepPlan,
    WarmStartSettings,
    load_hamiltonian,
    solve_excited,
    solve_ground,
    solve_ladder,
    sweep,
)
from .mitigation import (
    ConfusionMatrix,
    ReadoutNoise,
    ShotHistogram,
    calibrate,
    mitigate,
)
from .objective import (
    DiscriminatorDiagnostics,
    EvaluationMode,
    Ladder,
    LadderLevel,
    Mitigator,
    c_disc,
    c_gen,
    diagnostics,
    select_gamma,
)
from .optim import (
    RpropState,
    parameter_shift_gradient,
    parameter_shift_gradient_all,
    rotosolve_sweep,
    rprop_step,
)
from .oracle import Spectrum, alpha_decomposition, exact_spectrum, overlaps
from .pauli import (
    PauliParseError,
    PauliSum,
    PauliTerm,
    dense_matrix,
    expectation_exact,
    expectation_sampled,
    parse_pauli_sum,
)
from .simulator import (
    Circuit,
    Entangler,
    Rotation,
    StateVector,
    ancilla_zero_probability,
    append_ancilla,
    apply_circuit,
    run_circuit,
    sample_bitstrings,
)

__version__ = "0.1.0"
