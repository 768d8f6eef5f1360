"""
Local QUBO minimizers: simulated annealing, tabu search and exhaustive search.

All three return a :class:`SolveResult` whose energies are recomputed with
:func:`sharpe_qubo.qubo.evaluate`, so they include the QUBO offset and are
comparable across solvers.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ProblemTooLargeError
from ..qubo import evaluate
from ..seeding import derive_seed
from . import _kernels

EXHAUSTIVE_MAX_N = 24
SOLVERS = ("sa", "tabu", "exhaustive")


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric inverse-temperature schedule.

    ``beta_start``/``beta_end`` left as ``None`` are derived from the
    coefficient magnitudes of the problem being solved.
    """

    sweeps: int = 1000
    beta_start: float | None = None
    beta_end: float | None = None
    restarts: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.beta_start is not None and self.beta_end is not None:
            if not 0 < self.beta_start <= self.beta_end:
                raise ValueError("need 0 < beta_start <= beta_end")

    def betas(self, Q):
        lo, hi = self.beta_start, self.beta_end
        if lo is None or hi is None:
            auto_lo, auto_hi = default_beta_range(Q)
            lo = auto_lo if lo is None else lo
            hi = auto_hi if hi is None else hi
            hi = max(hi, lo)
        if self.sweeps == 1:
            return np.array([hi])
        return np.geomspace(lo, hi, self.sweeps)


@dataclass(frozen=True, eq=False)
class SolveResult:
    best_bits: np.ndarray
    best_energy: float
    samples: list = field(default_factory=list)
    wall_time: float = 0.0
    solver: str = ""

    @classmethod
    def from_samples(cls, Q, states, solver, started):
        samples = [(np.asarray(s, dtype=np.int8), evaluate(Q, s)) for s in states]
        best_bits, best_energy = min(samples, key=lambda se: (se[1], _lex_key(se[0])))
        return cls(best_bits, best_energy, samples, time.perf_counter() - started, solver)


def _lex_key(bits):
    # bit 0 is the least significant position
    return tuple(int(b) for b in bits[::-1])


def _split(Q):
    sym = Q.symmetric_couplings()
    return (
        np.ascontiguousarray(Q.diagonal(), dtype=float),
        sym.indptr.astype(np.int64),
        sym.indices.astype(np.int64),
        np.ascontiguousarray(sym.data, dtype=float),
    )


def default_beta_range(Q):
    """Hot enough to accept the worst flip half the time at the start, cold
    enough to reject the smallest uphill flip with probability 0.99 at the end.
    """
    if Q.n == 0:
        return 1.0, 1.0
    abs_rows = np.asarray(abs(Q.symmetric_couplings()).sum(axis=1)).ravel()
    max_delta = float(np.max(np.abs(Q.diagonal()) + abs_rows))
    nonzero = np.abs(Q.upper.data)
    nonzero = nonzero[nonzero > 0]
    if max_delta == 0.0 or nonzero.size == 0:
        return 1.0, 1.0
    min_delta = float(nonzero.min())
    beta_start = math.log(2.0) / max_delta
    beta_end = max(math.log(100.0) / min_delta, beta_start)
    return beta_start, beta_end


def _run_parallel(fn, jobs, threads):
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def simulated_annealing(Q, schedule=None, threads=None):
    """Single-bit-flip Metropolis annealing with independent seeded restarts."""
    schedule = schedule or AnnealSchedule()
    started = time.perf_counter()
    if Q.n == 0:
        return SolveResult.from_samples(Q, [np.zeros(0)], "sa", started)
    lin, indptr, indices, data = _split(Q)
    betas = schedule.betas(Q)

    def restart(r):
        seed = derive_seed(schedule.seed, r)
        bits, _ = _kernels.anneal(lin, indptr, indices, data, betas, seed)
        return bits

    states = _run_parallel(restart, list(range(schedule.restarts)), threads)
    return SolveResult.from_samples(Q, states, "sa", started)


def tabu_search(Q, iterations=5000, tenure=None, seed=0, restarts=1, threads=None):
    """Steepest-descent tabu search; ``tenure`` defaults to ``n // 4`` clipped to [1, 20]."""
    if tenure is None:
        tenure = max(1, min(20, Q.n // 4))
    if tenure < 1:
        raise ValueError("tenure must be >= 1")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    started = time.perf_counter()
    if Q.n == 0:
        return SolveResult.from_samples(Q, [np.zeros(0)], "tabu", started)
    lin, indptr, indices, data = _split(Q)

    def restart(r):
        bits, _ = _kernels.tabu(
            lin, indptr, indices, data, int(iterations), int(tenure), derive_seed(seed, r)
        )
        return bits

    states = _run_parallel(restart, list(range(restarts)), threads)
    return SolveResult.from_samples(Q, states, "tabu", started)


def exhaustive(Q, max_n=EXHAUSTIVE_MAX_N):
    """Exact minimum by Gray-code enumeration (ties: smallest bitstring,
    reading bit 0 as the least significant digit)."""
    if Q.n > max_n:
        raise ProblemTooLargeError(
            f"exhaustive search limited to {max_n} variables, got {Q.n}"
        )
    started = time.perf_counter()
    if Q.n == 0:
        return SolveResult.from_samples(Q, [np.zeros(0)], "exhaustive", started)
    lin, indptr, indices, data = _split(Q)
    scale = 1.0 + float(np.abs(Q.upper.data).sum())
    code, _ = _kernels.gray_enumerate(lin, indptr, indices, data, 1e-12 * scale)
    bits = np.array([(int(code) >> i) & 1 for i in range(Q.n)], dtype=np.int8)
    return SolveResult.from_samples(Q, [bits], "exhaustive", started)


@dataclass(frozen=True)
class SolverConfig:
    """JSON-facing solver block."""

    solver: str = "sa"
    sweeps: int = 1000
    beta_start: float | None = None
    beta_end: float | None = None
    restarts: int = 10
    iterations: int = 5000
    tenure: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")

    @classmethod
    def from_dict(cls, data):
        allowed = set(cls.__dataclass_fields__)
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown solver config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    def with_seed(self, seed):
        return SolverConfig(**{**self.to_dict(), "seed": int(seed)})

    def schedule(self):
        return AnnealSchedule(
            self.sweeps, self.beta_start, self.beta_end, self.restarts, self.seed
        )


def solve(Q, config=None, threads=None):
    config = config or SolverConfig()
    if config.solver == "sa":
        return simulated_annealing(Q, config.schedule(), threads=threads)
    if config.solver == "tabu":
        return tabu_search(
            Q, config.iterations, config.tenure, config.seed,
            restarts=config.restarts, threads=threads,
        )
    return exhaustive(Q)
