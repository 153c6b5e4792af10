"""shortcut-forge: shortcuts to adiabaticity for finite-dimensional quantum systems.

Exact and approximate counterdiabatic driving, Lewis-Riesenfeld invariant
engineering, fast-forward scaling, digitized (Trotterized) driving, and
quantum-speed-limit performance certificates, on dense matrices at desk scale.
"""

from .config import hbar, set_hbar
from .errors import (
    ConfigError,
    DegeneracyError,
    DimensionMismatchError,
    GaugeDiscontinuityError,
    GridTooCoarseError,
    HermiticityError,
    IllConditionedError,
    NumericalFailureError,
    ShortcutForgeError,
    SpanningError,
)
from .operators import (
    OperatorBasis,
    as_hermitian,
    commutator,
    expand_in_basis,
    frobenius_inner,
    frobenius_norm,
    gell_mann_basis,
    liouvillian_apply,
    nested_commutator,
    pauli_basis,
    pauli_matrix,
    reconstruct_from_basis,
)
from .schedule import Schedule
from .dynamics import StateTrajectory, adiabatic_coefficients, evolve, fidelity, overlap, step_unitary
from .spectral import (
    AdiabaticState,
    EigenPath,
    adiabatic_gauge_potential,
    adiabatic_state,
    adiabaticity_metric,
    counterdiabatic_term,
    eigenpath,
    exact_cd,
    geometric_integrand,
    loop_geometric_phase,
    quantum_geometric_tensor,
)
from .agp import (
    KrylovChain,
    LinearCDSystem,
    action_value,
    algebraic_cd,
    algebraic_system,
    assemble_cd,
    cd_integral_representation,
    krylov_cd,
    krylov_chain,
    krylov_system,
    odd_commutator_support,
    solve_cd,
    variational_cd,
    variational_system,
)
from .invariants import (
    AlgebraSpec,
    DynamicalInvariant,
    decompose_in_invariant_basis,
    hamiltonian_from_modes,
    invariant_residual,
    inverse_engineer_schedule,
    lr_phase,
    structure_constants,
)
from .fastforward import (
    FFGauge,
    FFPhases,
    TimeRescaling,
    ff_hamiltonian,
    ff_nonadiabatic_hamiltonian,
    ff_nonadiabatic_term,
    ff_of_cd,
    nonadiabatic_phases,
    regularized_hamiltonian,
)
from .gridff import (
    GridSystem1D,
    ff_potential,
    ff_wavefunction,
    phase_from_continuity,
    potentials_from_wavefunction,
    split_step_evolve,
)
from .digitized import (
    ScalingReport,
    TrotterPlan,
    digitization_error,
    trotter_baseline_error,
    trotter_cd_evolve,
    trotter_step_unitaries,
)
from .qsl import BoundReport, qsl_continuous, qsl_discrete, stddev_in_state
from . import models

__version__ = "0.1.0"
