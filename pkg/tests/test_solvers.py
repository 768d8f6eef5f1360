import numpy as np
import pytest

from sharpe_qubo.errors import ProblemTooLargeError
from sharpe_qubo.qubo import QuboMatrix, equality_penalty, evaluate, evaluate_many
from sharpe_qubo.solvers import (
    AnnealSchedule,
    SolverConfig,
    exhaustive,
    simulated_annealing,
    solve,
    tabu_search,
)
from sharpe_qubo.solvers.heuristics import default_beta_range

from .conftest import all_bitstrings


def random_qubo(rng, n):
    return QuboMatrix(n, np.triu(rng.uniform(-1, 1, (n, n))))


def naive_minimum(Q):
    X = all_bitstrings(Q.n)
    return float(np.min(evaluate_many(Q, X)))


class TestSimulatedAnnealing:
    def test_single_variable(self):
        Q = QuboMatrix.from_entries(1, {(0, 0): -5.0})
        res = simulated_annealing(Q, AnnealSchedule(sweeps=50, restarts=4))
        assert res.best_energy == -5.0
        np.testing.assert_array_equal(res.best_bits, [1])
        assert all(e == -5.0 for _, e in res.samples)
        assert len(res.samples) == 4

    def test_penalty_one_hot(self):
        res = simulated_annealing(equality_penalty([1, 1, 1], 1), AnnealSchedule(sweeps=200, restarts=3))
        assert res.best_energy == 0.0
        assert res.best_bits.sum() == 1

    def test_reproducible(self, rng):
        Q = random_qubo(rng, 20)
        sched = AnnealSchedule(sweeps=100, restarts=3, seed=11)
        a, b = simulated_annealing(Q, sched), simulated_annealing(Q, sched)
        np.testing.assert_array_equal(a.best_bits, b.best_bits)
        assert [e for _, e in a.samples] == [e for _, e in b.samples]

    def test_thread_count_does_not_change_result(self, rng):
        Q = random_qubo(rng, 20)
        sched = AnnealSchedule(sweeps=100, restarts=4, seed=3)
        a = simulated_annealing(Q, sched, threads=1)
        b = simulated_annealing(Q, sched, threads=4)
        assert [s.tolist() for s, _ in a.samples] == [s.tolist() for s, _ in b.samples]

    def test_best_energy_is_evaluated(self, rng):
        Q = QuboMatrix(12, np.triu(rng.uniform(-1, 1, (12, 12))), offset=2.5)
        res = simulated_annealing(Q, AnnealSchedule(sweeps=100, restarts=2))
        assert res.best_energy == evaluate(Q, res.best_bits)
        assert res.best_energy == min(e for _, e in res.samples)

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            AnnealSchedule(sweeps=0)
        with pytest.raises(ValueError):
            AnnealSchedule(beta_start=2.0, beta_end=1.0)

    def test_default_betas(self, rng):
        lo, hi = default_beta_range(random_qubo(rng, 10))
        assert 0 < lo <= hi
        assert default_beta_range(QuboMatrix.zeros(3)) == (1.0, 1.0)

    def test_small_battery(self, rng):
        for _ in range(10):
            Q = random_qubo(rng, 14)
            res = simulated_annealing(Q, AnnealSchedule(sweeps=1000, restarts=5))
            assert res.best_energy == pytest.approx(naive_minimum(Q), abs=1e-9)


class TestTabu:
    def test_single_positive(self):
        res = tabu_search(QuboMatrix.from_entries(1, {(0, 0): 3.0}), iterations=20, tenure=1)
        np.testing.assert_array_equal(res.best_bits, [0])
        assert res.best_energy == 0.0

    def test_half_half_penalty(self):
        res = tabu_search(equality_penalty([0.5, 0.5], 1), iterations=50, tenure=1)
        np.testing.assert_array_equal(res.best_bits, [1, 1])
        assert res.best_energy == 0.0

    def test_reproducible(self, rng):
        Q = random_qubo(rng, 20)
        a = tabu_search(Q, iterations=300, seed=5, restarts=2)
        b = tabu_search(Q, iterations=300, seed=5, restarts=2)
        np.testing.assert_array_equal(a.best_bits, b.best_bits)

    def test_bad_tenure(self, rng):
        with pytest.raises(ValueError):
            tabu_search(random_qubo(rng, 4), tenure=0)

    def test_small_battery(self, rng):
        for _ in range(10):
            Q = random_qubo(rng, 14)
            res = tabu_search(Q, iterations=3000)
            assert res.best_energy == pytest.approx(naive_minimum(Q), abs=1e-9)


class TestExhaustive:
    def test_zero(self):
        res = exhaustive(QuboMatrix.zeros(4))
        assert res.best_energy == 0.0
        np.testing.assert_array_equal(res.best_bits, [0, 0, 0, 0])

    def test_tie_break(self):
        Q = QuboMatrix.from_entries(2, {(0, 0): -1, (1, 1): -1, (0, 1): 3})
        res = exhaustive(Q)
        assert res.best_energy == -1.0
        np.testing.assert_array_equal(res.best_bits, [1, 0])

    def test_naive_scan(self, rng):
        Q = QuboMatrix(12, np.triu(rng.normal(size=(12, 12))), offset=0.7)
        X = all_bitstrings(12)
        energies = [evaluate(Q, x) for x in X]
        res = exhaustive(Q)
        assert res.best_energy == pytest.approx(min(energies), abs=1e-12)
        assert evaluate(Q, res.best_bits) == res.best_energy

    def test_size_limit(self):
        with pytest.raises(ProblemTooLargeError):
            exhaustive(QuboMatrix.zeros(25))

    def test_lower_bounds_heuristics(self, rng):
        Q = random_qubo(rng, 16)
        exact = exhaustive(Q).best_energy
        assert simulated_annealing(Q, AnnealSchedule(sweeps=200, restarts=2)).best_energy >= exact - 1e-12
        assert tabu_search(Q, iterations=200).best_energy >= exact - 1e-12


class TestSolverConfig:
    def test_unknown_solver(self):
        with pytest.raises(ValueError):
            SolverConfig(solver="qpu")

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            SolverConfig.from_dict({"solver": "sa", "temperature": 3})

    def test_round_trip_and_dispatch(self, rng):
        Q = random_qubo(rng, 8)
        exact = exhaustive(Q).best_energy
        for name in ("sa", "tabu", "exhaustive"):
            config = SolverConfig.from_dict(SolverConfig(solver=name, sweeps=300, restarts=2).to_dict())
            res = solve(Q, config)
            assert res.solver == name
            assert res.best_energy == pytest.approx(exact, abs=1e-9)

    def test_with_seed(self):
        assert SolverConfig(solver="tabu").with_seed(9).seed == 9
