"""QUBO formulations of Sharpe-ratio maximization, with local solvers,
penalty calibration and a classical baseline."""

from .calibration import (
    CalibrationReport,
    LambdaGrid,
    RunStatistics,
    calibrate,
    collect_statistics,
)
from .formulations import (
    Discretization,
    PortfolioSolution,
    QuboModel,
    build,
    build_proposed,
    build_proxy,
    decode_proposed,
    decode_proxy,
    feasibility,
    proposed_discretization,
    proxy_discretization,
    sharpe_ratio,
)
from .market_data import (
    AssetStats,
    PricePanel,
    ReturnPanel,
    annualized_stats,
    clean_panel,
    filter_positive_mu,
    load_prices,
    log_returns,
    normality_score,
    simple_returns,
)
from .qubo import (
    IsingModel,
    QuboMatrix,
    add_scaled,
    equality_penalty,
    evaluate,
    ising_to_qubo,
    qubo_to_ising,
)
from .solvers import (
    AnnealSchedule,
    SolveResult,
    SolverConfig,
    classical_max_sharpe,
    exhaustive,
    simulated_annealing,
    tabu_search,
)

__version__ = "0.1.0"
