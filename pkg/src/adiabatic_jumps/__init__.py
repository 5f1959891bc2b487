"""Jump expansion of slowly driven quantum evolution.

The state of a slowly driven system is expanded in the number of transitions
between tracked instantaneous eigenstates; between transitions the system
rides a level and accumulates dynamical phase.  This package computes those
amplitudes order by order in a gauge-fixed moving frame, validates them
against two independent exact propagators, and measures the asymptotic
scaling of the corrections.
"""

__version__ = "0.1.0"

from .errors import (
    AdiabaticJumpsError,
    ConfigurationError,
    DegenerateInput,
    DimensionMismatch,
    GapCollapse,
    GridTooCoarse,
    InvalidParameter,
    LevelOutOfRange,
    NonFinite,
    NumericalError,
    NumericalFailure,
    OrderUnavailable,
    OutOfDomain,
    ParseError,
    PathTooLong,
    PipelineError,
    StepSizeUnderflow,
    TrackingAmbiguous,
    UnknownFamily,
    ValidationError,
)
from .models import (
    FAMILY_NAMES,
    Model,
    ModelScales,
    ModelSpec,
    build_model,
    central_difference_derivative,
    dh_ds_at,
    h_at,
)
from .frame import (
    CouplingKernel,
    EigenFrame,
    PhaseTable,
    TimeGrid,
    build_frame,
    coupling_at,
    coupling_fd,
    coupling_kernel,
    cumulative_simpson_c,
    decompose,
    loop_phase,
    oscillation_grid,
    phase_table,
    uniform_grid,
)
from .expansion import (
    DiagramPath,
    JumpSeries,
    assemble_state,
    diagram_paths,
    expand,
    moving_kernel,
    nested_quadrature_term,
    transition_amplitude,
)
from .propagate import (
    CrossValidation,
    PropagationResult,
    cross_validate,
    initial_eigenstate,
    moving_amplitudes,
    propagate_ode,
    propagate_slicing,
)
from .scaling import (
    PowerLawFit,
    ScalingReport,
    asymptotic_residual_scan,
    boundary_asymptotic,
    constant_case_amplitude,
    coupling_gamma,
    endpoint_order_magnitude,
    first_order_decay_scan,
    fit_power_law,
    secular_lambda_scan,
    secular_probe,
    standard_bound,
)
from .pipeline import Pipeline, build_pipeline
from .config import RunConfig, load_config, parse_config
from .runner import RunResult, SweepResult, config_hash, emit, run_single, run_sweep
