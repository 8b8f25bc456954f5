"""Critical-constant bounds, LP-improved procedures and power studies for
multiple testing under arbitrary p-value dependence."""

from .constants import (
    CriticalVector,
    Family,
    bh_constants,
    by_constants,
    gr_sd_constants,
    lr_fdp_constants,
    lr_kfwer_constants,
    rescale,
)
from .lp import (
    LPProblem,
    LPSolution,
    InfeasibleFloorError,
    SolveStatus,
    build_problem,
    diagnostics,
    solve,
    solve_cached,
)
from .matrices import (
    AssociatedMatrix,
    ErrorRateSpec,
    FdpSdAux,
    FdpSuAux,
    Rate,
    associated_matrix,
    bound_vector,
    fdp_sd_aux,
    fdp_sd_matrix,
    fdp_su_aux,
    fdp_su_matrix,
    is_feasible,
    kfwer_sd_matrix,
    kfwer_su_matrix,
    row_events,
)
from .procedures import (
    AdjustedPValues,
    DecisionSet,
    ProcedureSpec,
    PValueVector,
    adjusted_pvalues,
    fdp_stats,
    feasible_constants,
    run_procedure,
    standard_roster,
    step_down,
    step_up,
)
from .simulation import (
    CellStats,
    SimConfig,
    SimReport,
    default_true_counts,
    run_study,
    sample_statistics,
    two_sided_p,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustedPValues",
    "AssociatedMatrix",
    "CellStats",
    "CriticalVector",
    "DecisionSet",
    "ErrorRateSpec",
    "Family",
    "FdpSdAux",
    "FdpSuAux",
    "InfeasibleFloorError",
    "LPProblem",
    "LPSolution",
    "ProcedureSpec",
    "PValueVector",
    "Rate",
    "SimConfig",
    "SimReport",
    "SolveStatus",
    "adjusted_pvalues",
    "associated_matrix",
    "bh_constants",
    "bound_vector",
    "build_problem",
    "by_constants",
    "default_true_counts",
    "diagnostics",
    "fdp_sd_aux",
    "fdp_sd_matrix",
    "fdp_stats",
    "fdp_su_aux",
    "fdp_su_matrix",
    "feasible_constants",
    "gr_sd_constants",
    "is_feasible",
    "kfwer_sd_matrix",
    "kfwer_su_matrix",
    "lr_fdp_constants",
    "lr_kfwer_constants",
    "rescale",
    "row_events",
    "run_procedure",
    "run_study",
    "sample_statistics",
    "solve",
    "solve_cached",
    "standard_roster",
    "step_down",
    "step_up",
    "two_sided_p",
]
