"""chdlab: 2D spectral Cahn-Hilliard-Darcy simulator and verification lab."""

from .chemistry import (
    PhysicsParams,
    chemical_potential,
    double_well,
    double_well_prime,
    energy,
    energy_e0,
)
from .grid import (
    CompatibilityError,
    Field,
    GridSpec,
    SpectralField,
    VectorField,
    dealias,
    divergence,
    gradient,
    hminus1_seminorm,
    l2_norm,
    laplacian,
    mean,
    neg_laplacian_inverse,
    project_zero_mean,
    quadrature,
    sobolev_norm,
    to_nodal,
    to_spectral,
)
from .pressure import (
    divergence_constraint_residual,
    pressure_energy_identity_residual,
    solve_pressure,
    velocity,
)
from .sources import (
    PeriodicBoundedSource,
    SeparableDecaySource,
    SourceModel,
    TabulatedSource,
    UnsupportedSourceError,
    ZeroSource,
)
from .stepper import (
    IntegrationFailureError,
    SimState,
    StepperConfig,
    TrajectoryRecord,
    galerkin_rhs,
    linear_growth_factor,
    make_state,
    run,
    step,
)
from .diagnostics import (
    DiagnosticsRecord,
    Recorder,
    continuous_dependence_probe,
    energy_law_residual,
    lyapunov_tilde,
    psi1_functional,
    pullback_probe,
    rate_fit,
    stationarity_residual,
)
from .steady import NonConvergenceError, StationaryResult, constant_state, solve_stationary
from .gronwall import (
    GronwallInstance,
    PiecewiseConstant,
    gron1_bound,
    q_value,
    random_instance,
    sequence_params,
    verify_ensemble,
    verify_instance,
)

__version__ = "0.1.0"
