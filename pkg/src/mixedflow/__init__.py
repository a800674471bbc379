"""Pseudospectral simulator for volume-constrained curvature flows of radial graphs."""

__version__ = "0.1.0"

from .errors import (
    AdmissibilityError,
    ConfigError,
    ConstraintDegenerateError,
    DegreeOverflowError,
    FitConvergenceError,
    GridError,
    MixedFlowError,
    SnapshotError,
    SpeedError,
    StepRejectedError,
)
from .harmonics import (
    Grid,
    RadialField,
    analyze,
    build_grid,
    gradient_sq,
    harmonic_multiplicity,
    laplace_beltrami,
    mean_value,
    project_center,
    quadrature,
    synthesize,
    total_coefficients,
)
from .geometry import (
    CurvatureBundle,
    curvature_bundle,
    elementary_symmetric,
    enclosed_volume,
    surface_measure,
)
from .speeds import SpeedSpec, eval_speed, make_speed, reference_speed, umbilic_derivative
from .flow import (
    DiagnosticsRecord,
    FlowConfig,
    FlowProblem,
    FlowRun,
    FlowState,
    cfl_timestep,
    default_timestep,
    evaluate_G,
    global_term,
    linearized_at_zero,
    run,
    step_explicit,
    step_imex,
)
from .analysis import (
    SphereCoords,
    SpectrumReport,
    analytic_spectrum,
    fit_decay_rate,
    fit_sphere,
    mixed_volume,
    numerical_jacobian,
    project_center_coords,
    sphere_from_coords,
    stable_decay_rate,
)
from .io import (
    InitSpec,
    ParsedConfig,
    parse_config,
    parse_config_text,
    random_band_field,
    read_snapshot,
    write_snapshot,
)
from .presets import ExperimentPreset, ExperimentResult, build_preset, run_experiment
