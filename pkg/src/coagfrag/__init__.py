"""Equilibria and relaxation of a coagulation-fragmentation model for group sizes."""

__version__ = "0.1.0"

from .analysis import (
    AsymptoteKind,
    AsymptoteModel,
    MonotonicityReport,
    RateTable,
    asymptote_eval,
    asymptote_gap,
    complete_monotonicity_check,
    convergence_rate,
    gamma_profile,
    grid_refinement_study,
    log10_asymptote,
    log10_density_asymptote,
    loglog_slope,
    rate_table,
    relative_distance,
)
from .errors import (
    BlowUpError,
    DivergenceError,
    NegativeStateError,
    RecursionBreakdown,
    SingularSystemError,
    SolverError,
    StepCollapseError,
)
from .evolution import StepMode, StepPolicy, Trajectory, euler_step, evolve, uniform_init
from .model import (
    Distribution,
    Grid,
    MassConvention,
    ModelRates,
    RateVector,
    apply_p,
    apply_S,
    coagulation_rhs,
    fragmentation_rhs,
    full_rhs,
    moment,
    rescale_solution,
    stationary_residual,
    time_scale,
)
from .newton import (
    NewtonReport,
    assemble_newton_system,
    exponential_init,
    linearized_operator,
    newton_step,
    solve_equilibrium,
)
from .recursive import (
    EquilibriumSequence,
    equilibrium_for_mass,
    equilibrium_sequence,
    small_size_indicator,
    solve_m0,
    stationarity_defect,
)
