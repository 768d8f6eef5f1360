import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpe_qubo.errors import DimensionError
from sharpe_qubo.qubo import (
    IsingModel,
    QuboMatrix,
    add_scaled,
    equality_penalty,
    evaluate,
    evaluate_many,
    ising_to_qubo,
    load_qubo_json,
    load_qubo_text,
    qubo_to_ising,
    save_qubo_json,
    save_qubo_text,
)

from .conftest import all_bitstrings, dense_energy


def random_qubo(rng, n, density=1.0):
    A = np.triu(rng.uniform(-1, 1, (n, n)))
    A[rng.random((n, n)) > density] = 0.0
    return QuboMatrix(n, A, rng.uniform(-1, 1))


def ising_energy_loops(h, J, offset, s):
    n = len(h)
    total = offset + sum(h[i] * s[i] for i in range(n))
    for i in range(n):
        for j in range(i + 1, n):
            total += J[i][j] * s[i] * s[j]
    return total


class TestQuboMatrix:
    def test_normalizes_and_sums_duplicates(self):
        Q = QuboMatrix.from_entries(3, [(1, 0, 2.0), (0, 1, 1.0), (2, 2, 0.0), (2, 2, -1.0)])
        assert Q.entries == {(0, 1): 3.0, (2, 2): -1.0}

    def test_no_explicit_zeros(self):
        Q = QuboMatrix.from_entries(2, [(0, 1, 1.0), (1, 0, -1.0)])
        assert Q.entries == {}
        assert Q.nnz == 0

    def test_out_of_range(self):
        with pytest.raises(DimensionError):
            QuboMatrix.from_entries(2, [(0, 2, 1.0)])

    def test_rejects_lower_triangle(self):
        with pytest.raises(DimensionError):
            QuboMatrix(2, np.array([[0.0, 0.0], [1.0, 0.0]]))

    def test_from_matrix_folds(self, rng):
        A = rng.normal(size=(5, 5))
        Q = QuboMatrix.from_matrix(A)
        for x in all_bitstrings(5):
            assert evaluate(Q, x) == pytest.approx(float(x @ A @ x), abs=1e-12)


class TestEvaluate:
    def test_hand_expansion(self):
        Q = QuboMatrix.from_entries(2, {(0, 0): 1, (0, 1): -2, (1, 1): 1})
        assert evaluate(Q, [1, 1]) == 0.0

    def test_zero_bits_give_offset(self, rng):
        Q = random_qubo(rng, 6)
        assert evaluate(Q, np.zeros(6)) == Q.offset

    def test_against_dense_oracle(self, rng):
        Q = random_qubo(rng, 10, density=0.6)
        dense = Q.to_dense().tolist()
        for _ in range(20):
            x = rng.integers(0, 2, 10)
            assert evaluate(Q, x) == pytest.approx(dense_energy(dense, Q.offset, x), abs=1e-12)

    def test_many_matches_single(self, rng):
        Q = random_qubo(rng, 7)
        X = all_bitstrings(7)
        np.testing.assert_allclose(evaluate_many(Q, X), [evaluate(Q, x) for x in X], atol=1e-12)

    def test_length_mismatch(self, rng):
        with pytest.raises(DimensionError):
            evaluate(random_qubo(rng, 3), [0, 1])

    def test_linear_in_coefficients(self, rng):
        A, B = random_qubo(rng, 6), random_qubo(rng, 6)
        x = rng.integers(0, 2, 6)
        summed = QuboMatrix(6, A.upper + B.upper, A.offset + B.offset)
        assert evaluate(summed, x) == pytest.approx(evaluate(A, x) + evaluate(B, x), abs=1e-12)


class TestIsing:
    def test_single_bias(self):
        Q = ising_to_qubo(IsingModel(1, [1.0], np.zeros((1, 1))))
        assert Q.entries == {(0, 0): 2.0}
        assert Q.offset == -1.0
        assert evaluate(Q, [0]) == -1.0 and evaluate(Q, [1]) == 1.0

    def test_zero_model(self):
        Q = ising_to_qubo(IsingModel(3, np.zeros(3), np.zeros((3, 3))))
        assert Q.nnz == 0 and Q.offset == 0.0

    def test_inverse_example(self):
        m = qubo_to_ising(QuboMatrix.from_entries(1, {(0, 0): 2.0}, offset=-1.0))
        np.testing.assert_array_equal(m.h, [1.0])
        assert m.offset == 0.0
        assert m.J.nnz == 0

    def test_zero_qubo(self):
        m = qubo_to_ising(QuboMatrix.zeros(4))
        assert not m.h.any() and m.J.nnz == 0 and m.offset == 0.0

    def test_random_ising_exhaustive(self, rng):
        n = 8
        h = rng.normal(size=n)
        J = np.triu(rng.normal(size=(n, n)), k=1)
        model = IsingModel(n, h, J, 0.3)
        Q = ising_to_qubo(model)
        for spins in itertools.product((-1, 1), repeat=n):
            s = np.array(spins)
            x = (s + 1) // 2
            expected = ising_energy_loops(h, J, 0.3, s)
            assert evaluate(Q, x) == pytest.approx(expected, abs=1e-12)
            assert model.energy(s) == pytest.approx(expected, abs=1e-12)

    def test_random_qubo_round_trip(self, rng):
        Q = random_qubo(rng, 8)
        back = ising_to_qubo(qubo_to_ising(Q))
        X = all_bitstrings(8)
        assert np.max(np.abs(evaluate_many(back, X) - evaluate_many(Q, X))) <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_round_trip_property(self, n, seed):
        Q = random_qubo(np.random.default_rng(seed), n, density=0.7)
        back = ising_to_qubo(qubo_to_ising(Q))
        X = all_bitstrings(n)
        assert np.max(np.abs(evaluate_many(back, X) - evaluate_many(Q, X))) <= 1e-12


class TestAddScaled:
    def test_identity(self, rng):
        Q = random_qubo(rng, 4)
        out = add_scaled(QuboMatrix.zeros(4), 1.0, Q)
        assert out.entries == Q.entries and out.offset == Q.offset

    def test_zero_scale(self, rng):
        Q, H = random_qubo(rng, 4), random_qubo(rng, 4)
        out = add_scaled(Q, 0.0, H)
        assert out.entries == Q.entries and out.offset == Q.offset

    def test_linearity(self, rng):
        Q, H = random_qubo(rng, 6), random_qubo(rng, 6)
        out = add_scaled(Q, 2.5, H)
        for _ in range(10):
            x = rng.integers(0, 2, 6)
            assert evaluate(out, x) == pytest.approx(evaluate(Q, x) + 2.5 * evaluate(H, x), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            add_scaled(QuboMatrix.zeros(2), 1.0, QuboMatrix.zeros(3))

    def test_associative_commutative(self, rng):
        A, B, C = (random_qubo(rng, 5) for _ in range(3))
        left = add_scaled(add_scaled(A, 1.5, B), -0.5, C)
        right = add_scaled(add_scaled(A, -0.5, C), 1.5, B)
        X = all_bitstrings(5)
        np.testing.assert_allclose(evaluate_many(left, X), evaluate_many(right, X), atol=1e-12)


class TestEqualityPenalty:
    def test_hand_expansion(self):
        P = equality_penalty([1.0, 1.0], 1.0)
        assert P.entries == {(0, 0): -1.0, (0, 1): 2.0, (1, 1): -1.0}
        assert P.offset == 1.0
        assert evaluate(P, [1, 0]) == 0.0

    def test_matches_square(self, rng):
        a = rng.normal(size=7)
        t = rng.normal()
        P = equality_penalty(a, t)
        for x in all_bitstrings(7):
            assert evaluate(P, x) == pytest.approx((a @ x - t) ** 2, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.integers(-4, 4), min_size=1, max_size=8),
        st.integers(-6, 6),
    )
    def test_nonnegative_zero_iff_satisfied(self, coeffs, target):
        P = equality_penalty(coeffs, target)
        a = np.array(coeffs, dtype=float)
        for x in all_bitstrings(len(coeffs)):
            e = evaluate(P, x)
            assert e >= -1e-12
            assert (abs(e) < 1e-12) == (a @ x == target)


class TestSerialization:
    def test_json_round_trip(self, rng, tmp_path):
        Q = random_qubo(rng, 6, density=0.5)
        save_qubo_json(Q, tmp_path / "q.json")
        data = json.loads((tmp_path / "q.json").read_text())
        assert set(data) == {"n", "offset", "entries"}
        assert all(i <= j for i, j, _ in data["entries"])
        assert data == json.loads(json.dumps(Q.to_dict()))
        back = load_qubo_json(tmp_path / "q.json")
        assert back.entries == Q.entries and back.offset == Q.offset

    def test_text_round_trip(self, rng, tmp_path):
        Q = random_qubo(rng, 5, density=0.5)
        save_qubo_text(Q, tmp_path / "q.txt")
        lines = (tmp_path / "q.txt").read_text().splitlines()
        assert lines[0].startswith("# offset ")
        back = load_qubo_text(tmp_path / "q.txt")
        assert back.n == 5 and back.entries == Q.entries and back.offset == Q.offset
