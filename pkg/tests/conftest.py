import itertools

import numpy as np
import pytest

from sharpe_qubo.market_data import AssetStats


def random_spd(rng, n, ridge=0.05):
    B = rng.normal(size=(n, n))
    return B @ B.T / n + ridge * np.eye(n)


def make_stats(rng, n, mu_range=(0.05, 0.3), cov=None):
    if cov is None:
        cov = random_spd(rng, n) * 0.1
    mu = rng.uniform(*mu_range, n)
    return AssetStats.from_cov([f"A{i}" for i in range(n)], mu, cov)


def all_bitstrings(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8)


def dense_energy(upper, offset, x):
    """Straight double loop over i <= j; the oracle for QUBO energies."""
    n = len(x)
    total = offset
    for i in range(n):
        for j in range(i, n):
            total += upper[i][j] * x[i] * x[j]
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def stats3(rng):
    return make_stats(rng, 3)


# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        )
