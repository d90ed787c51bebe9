"""Graph-Laplacian cooperative localization for vehicle networks.

A centralized least-squares baseline plus three distributed adapt-then-combine
solvers (LMS, LMS with measurement exchanges, conjugate gradient) over a
time-varying vehicle graph, with a scenario simulator, metrics and a CLI.
"""

__version__ = "0.1.0"

from .centralized import CllSolution, cll_solve, lmse, solution_lmse
from .diffusion import (
    AgentState,
    CgState,
    DelayPolicy,
    InitPolicy,
    StepSizes,
    cg_step,
    coherent_init,
    compute_step_sizes,
    gllms_iterate,
    gllme_iterate,
    glcg_iterate,
    initial_estimates,
    make_agents,
    reset_on_membership_change,
    step_size_gllms,
    step_size_gllme,
)
from .errors import (
    ConfigError,
    DivergenceError,
    InvalidInputError,
    LapdiffError,
    TraceFormatError,
)
from .graph import (
    CombinationMatrix,
    ExtendedLaplacian,
    GraphConfig,
    VanetGraph,
    algebraic_connectivity,
    build_graph,
    extended_laplacian,
    laplacian,
    metropolis_weights,
)
from .sensing import (
    DifferentialCoords,
    MeasurementSet,
    NoiseConfig,
    differential_coords,
    sample_measurements,
    scaled_differentials,
    true_range,
)
from .simulator import (
    ALGORITHMS,
    MetricsRecord,
    ScenarioConfig,
    TrajectorySource,
    empirical_cdf,
    run_scenario,
    run_sweep,
    timing_report,
)
from .trajectories import (
    ControlPolicy,
    KinematicState,
    TrajectorySet,
    bicycle_step,
    generate_fleet,
    ingest_traces,
    write_trace_csv,
)
from .rng import Stream, measurement_streams, substream

__all__ = [
    "__version__",
    "ALGORITHMS",
    "AgentState",
    "CgState",
    "CllSolution",
    "CombinationMatrix",
    "ConfigError",
    "ControlPolicy",
    "DelayPolicy",
    "DifferentialCoords",
    "DivergenceError",
    "ExtendedLaplacian",
    "GraphConfig",
    "InitPolicy",
    "InvalidInputError",
    "KinematicState",
    "LapdiffError",
    "MeasurementSet",
    "MetricsRecord",
    "NoiseConfig",
    "ScenarioConfig",
    "StepSizes",
    "Stream",
    "TraceFormatError",
    "TrajectorySet",
    "TrajectorySource",
    "VanetGraph",
    "algebraic_connectivity",
    "bicycle_step",
    "build_graph",
    "cg_step",
    "cll_solve",
    "coherent_init",
    "compute_step_sizes",
    "differential_coords",
    "empirical_cdf",
    "extended_laplacian",
    "generate_fleet",
    "glcg_iterate",
    "gllme_iterate",
    "gllms_iterate",
    "ingest_traces",
    "initial_estimates",
    "laplacian",
    "lmse",
    "make_agents",
    "measurement_streams",
    "metropolis_weights",
    "reset_on_membership_change",
    "run_scenario",
    "run_sweep",
    "sample_measurements",
    "scaled_differentials",
    "solution_lmse",
    "step_size_gllme",
    "step_size_gllms",
    "substream",
    "timing_report",
    "true_range",
    "write_trace_csv",
]
