"""Spectral deferred corrections for semi-explicit index-1 DAEs."""

__version__ = "0.1.0"

from .collocation import (CollocationScheme, QDeltaMatrix, QDELTA_KINDS,
                          collocation_update, load_coefficients_file,
                          make_qdelta, make_radau_nodes)
from .linalg import (EigenConvergenceError, SingularMatrixError, Spectrum,
                     eigenvalues, lu_solve, spectral_radius, unpivoted_lu)
from .problems import (PROBLEM_REGISTRY, LinearTestDAE, ReactionDiffusionPDAE,
                       SemiExplicitDAE, StiffScalar, linear_test_dae,
                       make_problem, reaction_diffusion_pdae,
                       stiff_limit_scalar)
from .sdc_core import (VARIANTS, IntegrateConfig, NodeSolveError, RunRecord,
                       StepController, StepFailure, SweepState,
                       default_thread_count, integrate, linf_error,
                       provisional_state, run_step, run_step_fixed_sweeps,
                       solve_collocation_direct)
from .analysis import (IterationMatrixReport, OrderEstimate,
                       fit_loglog_slope, iteration_matrix_linear,
                       order_study, stiff_limit_matrix)

__all__ = [
    "CollocationScheme", "QDeltaMatrix", "QDELTA_KINDS", "collocation_update",
    "load_coefficients_file", "make_qdelta", "make_radau_nodes",
    "EigenConvergenceError", "SingularMatrixError", "Spectrum", "eigenvalues",
    "lu_solve", "spectral_radius", "unpivoted_lu",
    "PROBLEM_REGISTRY", "LinearTestDAE", "ReactionDiffusionPDAE",
    "SemiExplicitDAE", "StiffScalar", "linear_test_dae", "make_problem",
    "reaction_diffusion_pdae", "stiff_limit_scalar",
    "VARIANTS", "IntegrateConfig", "NodeSolveError", "RunRecord",
    "StepController", "StepFailure", "SweepState", "default_thread_count",
    "integrate", "linf_error", "provisional_state", "run_step",
    "run_step_fixed_sweeps", "solve_collocation_direct",
    "IterationMatrixReport", "OrderEstimate", "fit_loglog_slope",
    "iteration_matrix_linear", "order_study", "stiff_limit_matrix",
    "__version__",
]
