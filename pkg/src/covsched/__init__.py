"""Single-active-sensor scheduling for linear-Gaussian state estimation.

Builds the convex relaxation of the minimum-trace sensor scheduling problem,
rounds its covariance trajectory to an integer schedule by per-step tracking,
and backs the result with baselines, an exhaustive oracle, and an
a-posteriori suboptimality certificate.
"""

from .bench import BenchConfig, report_rank, run_benchmark, run_histogram
from .bounds import (
    BoundReport,
    compute_bound,
    epsilon_value,
    geometric_factors,
    save_report,
    verify_value_dominance,
)
from .errors import (
    AssemblyError,
    BudgetError,
    ConditioningError,
    CovschedError,
    DomainError,
    ParameterError,
    SchemaError,
    SolverFailure,
    ValidationError,
)
from .model import (
    Scenario,
    Schedule,
    Sensor,
    SensorSet,
    SystemModel,
    generate_scenario,
    info_increments,
    load_scenario,
    save_scenario,
    scenarios_equal,
    slice_scenario,
)
from .riccati import (
    CovTrajectory,
    InfoTrajectory,
    evaluate_schedule,
    g_update,
    g_update_info,
    h_update,
    jacobian_H,
)
from .scheduler import (
    ScheduleResult,
    detect_period,
    exhaustive_search,
    greedy_schedule,
    random_search,
    round_theta,
    track_covariance,
)
from .sdp_relax import (
    ConicProgram,
    RelaxedSolution,
    TightenedTuple,
    build_relaxation,
    evaluate_theta,
    load_solution,
    save_solution,
    solve_relaxation,
    svec,
    tighten,
    unsvec,
)

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "BenchConfig",
    "BoundReport",
    "BudgetError",
    "ConditioningError",
    "ConicProgram",
    "CovTrajectory",
    "CovschedError",
    "DomainError",
    "InfoTrajectory",
    "ParameterError",
    "RelaxedSolution",
    "Scenario",
    "Schedule",
    "ScheduleResult",
    "SchemaError",
    "Sensor",
    "SensorSet",
    "SolverFailure",
    "SystemModel",
    "TightenedTuple",
    "ValidationError",
    "build_relaxation",
    "compute_bound",
    "detect_period",
    "epsilon_value",
    "evaluate_schedule",
    "evaluate_theta",
    "exhaustive_search",
    "g_update",
    "g_update_info",
    "generate_scenario",
    "geometric_factors",
    "greedy_schedule",
    "h_update",
    "info_increments",
    "jacobian_H",
    "load_scenario",
    "load_solution",
    "random_search",
    "report_rank",
    "round_theta",
    "run_benchmark",
    "run_histogram",
    "save_report",
    "save_scenario",
    "save_solution",
    "scenarios_equal",
    "slice_scenario",
    "solve_relaxation",
    "svec",
    "tighten",
    "track_covariance",
    "unsvec",
    "verify_value_dominance",
]
