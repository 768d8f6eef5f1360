"""
Penalty-weight calibration and repeated-solve statistics.

``calibrate`` runs a solver several times on every ``(lambda0, lambda1)``
pair of a grid and keeps the pair with the highest share of feasible
solutions. ``collect_statistics`` keeps re-solving a fixed model until a
requested number of feasible portfolios has been gathered.
"""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import NoFeasibleConfigurationError
from .formulations import build
from .seeding import derive_seed
from .solvers.heuristics import SolverConfig, _run_parallel, solve


@dataclass(frozen=True)
class LambdaGrid:
    pairs: tuple
    runs_per_pair: int = 20

    def __post_init__(self):
        pairs = tuple((float(a), float(b)) for a, b in self.pairs)
        if not pairs:
            raise ValueError("lambda grid is empty")
        for l0, l1 in pairs:
            # lambda1 == 0 is allowed so the unconstrained energy can be probed
            if not l0 > 0 or not l1 >= 0:
                raise ValueError(f"invalid lambda pair ({l0}, {l1})")
        if self.runs_per_pair < 1:
            raise ValueError("runs_per_pair must be >= 1")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def cartesian(cls, lambda0s, lambda1s, runs_per_pair=20):
        return cls(tuple(product(lambda0s, lambda1s)), runs_per_pair)

    @classmethod
    def from_dict(cls, data):
        runs = int(data.get("runs_per_pair", 20))
        if "pairs" in data:
            return cls(tuple(tuple(p) for p in data["pairs"]), runs)
        return cls.cartesian(data["lambda0"], data["lambda1"], runs)

    def to_dict(self):
        return {"pairs": [list(p) for p in self.pairs], "runs_per_pair": self.runs_per_pair}


@dataclass(frozen=True)
class PairRecord:
    lambda0: float
    lambda1: float
    feasible_count: int
    total_runs: int
    best_sharpe: float | None
    mean_sharpe_feasible: float | None
    mean_residual: float

    @property
    def feasible_pct(self):
        return self.feasible_count / self.total_runs

    def to_dict(self):
        return {
            "lambda0": self.lambda0,
            "lambda1": self.lambda1,
            "feasible_count": self.feasible_count,
            "total_runs": self.total_runs,
            "feasible_pct": self.feasible_pct,
            "best_sharpe": self.best_sharpe,
            "mean_sharpe_feasible": self.mean_sharpe_feasible,
            "mean_residual": self.mean_residual,
        }


def _selection_key(record):
    best = record.best_sharpe if record.best_sharpe is not None else -np.inf
    return (record.feasible_pct, best, -record.lambda1)


@dataclass(frozen=True)
class CalibrationReport:
    kind: str
    records: tuple
    solver: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def chosen_index(self):
        keys = [_selection_key(r) for r in self.records]
        # first maximum wins so duplicated pairs resolve to the earliest entry
        return max(range(len(keys)), key=lambda i: (keys[i], -i))

    @property
    def chosen(self):
        return self.records[self.chosen_index]

    def to_dict(self):
        chosen = self.chosen
        return {
            "kind": self.kind,
            "seed": self.seed,
            "solver": self.solver,
            "chosen": {"lambda0": chosen.lambda0, "lambda1": chosen.lambda1},
            "records": [
                {**r.to_dict(), "chosen": i == self.chosen_index}
                for i, r in enumerate(self.records)
            ],
        }

    def to_csv(self):
        rows = self.to_dict()["records"]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()


def _solve_and_decode(model, config, seed):
    result = solve(model.matrix, config.with_seed(seed), threads=1)
    sol = model.decode(result.best_bits, energy=result.best_energy)
    return sol, result.wall_time


def calibrate(kind, stats, grid, config=None, seed=0, threads=None, **build_options):
    """Grid search over penalty weights.

    Run ``r`` of pair ``(l0, l1)`` is seeded with ``derive_seed(seed, l0, l1, r)``,
    so repeated pairs give identical records. The chosen pair maximizes the
    feasible share, then the best feasible Sharpe ratio, then prefers the
    smaller ``lambda1``. Raises ``NoFeasibleConfigurationError`` (carrying the
    full report) when no run on any pair is feasible.
    """
    config = config or SolverConfig()
    records = []
    for l0, l1 in grid.pairs:
        model = build(kind, stats, l0, l1, **build_options)
        seeds = [derive_seed(seed, l0, l1, r) for r in range(grid.runs_per_pair)]
        runs = _run_parallel(lambda s: _solve_and_decode(model, config, s)[0], seeds, threads)
        sharpes = [s.sharpe for s in runs if s.feasible and s.sharpe is not None]
        records.append(
            PairRecord(
                lambda0=l0,
                lambda1=l1,
                feasible_count=sum(s.feasible for s in runs),
                total_runs=len(runs),
                best_sharpe=max(sharpes) if sharpes else None,
                mean_sharpe_feasible=float(np.mean(sharpes)) if sharpes else None,
                mean_residual=float(np.mean([s.residual for s in runs])),
            )
        )
    report = CalibrationReport(kind, tuple(records), config.to_dict(), seed)
    if all(r.feasible_count == 0 for r in records):
        raise NoFeasibleConfigurationError(report)
    return report


@dataclass(frozen=True, eq=False)
class RunStatistics:
    kind: str
    solver: str
    assets: tuple
    solutions: tuple
    n_requested: int
    attempts: int

    @property
    def shortfall(self):
        return len(self.solutions) < self.n_requested

    @property
    def sharpes(self):
        return [s.sharpe for s in self.solutions]

    @property
    def asset_counts(self):
        return [s.asset_count for s in self.solutions]

    def summary(self):
        return summarize(self.sharpes, self.asset_counts)

    def to_dict(self):
        return {
            "kind": self.kind,
            "solver": self.solver,
            "assets": list(self.assets),
            "n_requested": self.n_requested,
            "attempts": self.attempts,
            "shortfall": self.shortfall,
            "summary": self.summary(),
            "solutions": [
                {**s.to_dict(), "asset_count": s.asset_count} for s in self.solutions
            ],
        }

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "sharpe", "asset_count", "residual", "energy", "feasible"])
        for i, s in enumerate(self.solutions):
            writer.writerow([i, s.sharpe, s.asset_count, s.residual, s.energy, s.feasible])
        return buf.getvalue()


def summarize(sharpes, asset_counts):
    if not sharpes:
        return {"n": 0}
    return {
        "n": len(sharpes),
        "sharpe_min": min(sharpes),
        "sharpe_max": max(sharpes),
        "sharpe_mean": float(np.mean(sharpes)),
        "sharpe_median": float(statistics.median(sharpes)),
        "assets_min": min(asset_counts),
        "assets_max": max(asset_counts),
        "assets_mean": float(np.mean(asset_counts)),
    }


def collect_statistics(model, config=None, n_feasible=10, max_attempts=None, seed=0,
                       threads=None):
    """Solve ``model`` with fresh seeds until ``n_feasible`` feasible
    portfolios are found or ``max_attempts`` (default ``10 * n_feasible``)
    solves have been spent. A shortfall is reported, not raised."""
    if n_feasible < 1:
        raise ValueError("n_feasible must be >= 1")
    config = config or SolverConfig()
    if max_attempts is None:
        max_attempts = 10 * n_feasible
    kept = []
    attempts = 0
    batch = 1 if threads in (None, 1) else threads
    while len(kept) < n_feasible and attempts < max_attempts:
        size = min(batch, max_attempts - attempts)
        seeds = [derive_seed(seed, "collect", attempts + i) for i in range(size)]
        runs = _run_parallel(lambda s: _run_one(model, config, s), seeds, threads)
        for sol in runs:
            attempts += 1
            if sol.feasible and sol.sharpe is not None:
                kept.append(sol)
            if len(kept) == n_feasible:
                break
    return RunStatistics(
        model.kind, config.solver, model.assets, tuple(kept), n_feasible, attempts
    )


def _run_one(model, config, seed):
    sol, wall = _solve_and_decode(model, config, seed)
    sol.extra.update({"seed": seed, "wall_time": wall})
    return sol
