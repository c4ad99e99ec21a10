"""Closed-form cache-buffer sizing for files sharing a main-memory budget."""
from .allocators import (
    StrategyKind,
    allocate,
    allocate_minimax_ratio,
    allocate_nearest_ideal,
    allocate_total_calls,
    allocate_weighted_minimax,
    clamp_redistribute,
    closed_form,
    round_to_integers,
)
from .model import (
    Allocation,
    BudgetTooSmallError,
    CacheAllocError,
    ComparisonStandards,
    FileSpec,
    InfeasibleAllocationError,
    Objective,
    ObjectiveReport,
    Violation,
    Workload,
    check_feasible,
    evaluate_all,
    evaluate_f1,
    evaluate_f2,
    evaluate_f3,
    evaluate_f4,
)
from .oracle import (
    CriteriaMode,
    EnumerationTooLargeError,
    OracleResult,
    ParetoFront,
    brute_force_optimum,
    enumerate_feasible,
    pareto_front,
)
from .simulator import (
    AccessTrace,
    CostModelCheck,
    FetchPolicy,
    Interleaving,
    SimulationResult,
    generate_trace,
    simulate,
    validate_cost_model,
)

__version__ = "0.1.0"
