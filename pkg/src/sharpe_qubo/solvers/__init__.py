from .classical import (
    classical_max_sharpe,
    project_budget_simplex,
    project_budget_simplex_dykstra,
    tangency_closed_form,
)
from .heuristics import (
    AnnealSchedule,
    SolveResult,
    SolverConfig,
    default_beta_range,
    exhaustive,
    simulated_annealing,
    solve,
    tabu_search,
)

__all__ = [
    "AnnealSchedule",
    "SolveResult",
    "SolverConfig",
    "classical_max_sharpe",
    "default_beta_range",
    "exhaustive",
    "project_budget_simplex",
    "project_budget_simplex_dykstra",
    "simulated_annealing",
    "solve",
    "tabu_search",
    "tangency_closed_form",
]
