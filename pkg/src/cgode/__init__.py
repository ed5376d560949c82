"""Norm-preserving continuous Galerkin time stepping.

Variable-degree continuous Galerkin integration of u' = F(t, u) whose
right-hand side evaluation is fed through an inner L2 projection; for
orthogonal F (<F(t, v), v> = 0) the nodal values then stay exactly on the
sphere ||v|| = ||u0||.  A degree-raising reconstruction supplies a
guaranteed a posteriori bound on the max-norm error, and a study harness
reproduces h- and p-convergence experiments from the command line.
"""

from .basis import (
    Interval,
    LocalPoly,
    QuadratureRule,
    antiderivative_from_left,
    derivative,
    gauss_rule,
    legendre_derivatives,
    legendre_values,
    poly_eval,
    project,
)
from .estimator import (
    EstimatorReport,
    Reconstruction,
    delta_coeffs,
    estimate,
    jump_term,
    reconstruct,
)
from .problems import (
    BenchmarkProblem,
    SkewCheckFailed,
    get_problem,
    list_problems,
    make_linear_skew,
    skew3x3_exact,
    skew3x3_matrix,
)
from .solver import (
    CgSolution,
    CgSolverError,
    ContractionPolicy,
    ContractionViolated,
    ContractionWarning,
    PicardDiverged,
    RhsOperator,
    SolverOptions,
    StepSolver,
    TimePartition,
    check_contraction,
    integrate,
    locate_interval,
    nodal_norm_drift,
    solve_step,
    weak_residual,
)
from .study import (
    CSV_HEADER,
    ConfigError,
    OutputFormat,
    SATURATION_FLOOR,
    StudyConfig,
    StudyMode,
    StudyRow,
    config_from_mapping,
    eoc,
    linf_error,
    parse_config_file,
    rows_to_csv_text,
    rows_to_json_text,
    run_study,
    write_rows,
)

__version__ = "0.1.0"

__all__ = [
    "Interval",
    "LocalPoly",
    "QuadratureRule",
    "antiderivative_from_left",
    "derivative",
    "gauss_rule",
    "legendre_derivatives",
    "legendre_values",
    "poly_eval",
    "project",
    "EstimatorReport",
    "Reconstruction",
    "delta_coeffs",
    "estimate",
    "jump_term",
    "reconstruct",
    "BenchmarkProblem",
    "SkewCheckFailed",
    "get_problem",
    "list_problems",
    "make_linear_skew",
    "skew3x3_exact",
    "skew3x3_matrix",
    "CgSolution",
    "CgSolverError",
    "ContractionPolicy",
    "ContractionViolated",
    "ContractionWarning",
    "PicardDiverged",
    "RhsOperator",
    "SolverOptions",
    "StepSolver",
    "TimePartition",
    "check_contraction",
    "integrate",
    "locate_interval",
    "nodal_norm_drift",
    "solve_step",
    "weak_residual",
    "CSV_HEADER",
    "ConfigError",
    "OutputFormat",
    "SATURATION_FLOOR",
    "StudyConfig",
    "StudyMode",
    "StudyRow",
    "config_from_mapping",
    "eoc",
    "linf_error",
    "parse_config_file",
    "rows_to_csv_text",
    "rows_to_json_text",
    "run_study",
    "write_rows",
    "__version__",
]
