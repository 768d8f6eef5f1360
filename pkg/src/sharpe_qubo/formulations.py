"""
Two QUBO encodings of the Max-Sharpe portfolio problem.

``proxy``
    Rewards each asset's return-to-risk ratio, penalizes pairwise
    correlation, and enforces full investment ``sum(w) == 1`` with a
    quadratic penalty. Weights are fixed-point numbers on [0, 1].

``proposed``
    Minimizes ``y^T Sigma y`` subject to ``mu^T y == 1`` (penalty) with
    ``y`` discretized on [0, 1/mu_min]; portfolio weights are ``y / sum(y)``.

Variable ``(asset i, bit k)`` lives at index ``i * bits_per_asset + k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolatedError, DimensionError, DiscretizationError
from .market_data import AssetStats
from .qubo import QuboMatrix, add_scaled, equality_penalty, evaluate

PROXY = "proxy"
PROPOSED = "proposed"
KINDS = (PROXY, PROPOSED)

PROXY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Discretization:
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise DiscretizationError("discretization needs at least one coefficient")
        if any(not c > 0 for c in coeffs):
            raise DiscretizationError("discretization coefficients must be positive")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def bits_per_asset(self):
        return len(self.coeffs)

    @property
    def max_value(self):
        return float(np.sum(self.coeffs))

    @property
    def min_coeff(self):
        return min(self.coeffs)

    def as_array(self):
        return np.array(self.coeffs)

    def decode(self, bits, n_assets):
        """Continuous value per asset from a flat bitstring."""
        bits = np.asarray(bits)
        if bits.shape != (n_assets * self.bits_per_asset,):
            raise DimensionError(
                f"expected {n_assets * self.bits_per_asset} bits, got {bits.shape}"
            )
        return bits.reshape(n_assets, self.bits_per_asset).astype(float) @ self.as_array()

    def to_dict(self):
        return {"coeffs": list(self.coeffs)}


def proxy_discretization(K=9):
    """Weights on [0, 1] with step 0.002: d_k = 2**(k-1)/500, last = 1 - sum."""
    if K < 2:
        raise DiscretizationError("K must be at least 2")
    head = [2.0 ** (k - 1) / 500.0 for k in range(1, K)]
    # closed-form partial sum keeps the tail correctly rounded
    tail = (500.0 - (2.0 ** (K - 1) - 1.0)) / 500.0
    if not tail > 0:
        raise DiscretizationError(
            f"K={K} is too large: residual coefficient {tail} is not positive"
        )
    return Discretization(head + [tail])


def proposed_discretization(mu_min, step=0.1, H=12):
    """Values on [0, 1/mu_min]: c_k = step * 2**(k-1), last = 1/mu_min - sum."""
    if not mu_min > 0:
        raise DiscretizationError("mu_min must be positive")
    if H < 1 or not step > 0:
        raise DiscretizationError("need H >= 1 and step > 0")
    head = [step * 2.0 ** (k - 1) for k in range(1, H)]
    tail = 1.0 / mu_min - sum(head)
    if not tail > 0:
        raise DiscretizationError(
            "discretization exceeds upper bound: "
            f"sum of first {H - 1} coefficients >= 1/mu_min = {1.0 / mu_min}"
        )
    return Discretization(head + [tail])


def auto_bits(mu_min, step=0.1):
    """Largest H whose first H-1 coefficients stay below 1/mu_min."""
    bound = 1.0 / mu_min
    H = 1
    while step * (2.0 ** H - 1.0) < bound:
        H += 1
    return H


@dataclass(frozen=True, eq=False)
class QuboModel:
    matrix: QuboMatrix
    kind: str
    discretization: Discretization
    lambda0: float
    lambda1: float
    stats: AssetStats
    mu_min: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown formulation kind {self.kind!r}")
        expected = self.stats.n_assets * self.discretization.bits_per_asset
        if self.matrix.n != expected:
            raise DimensionError(
                f"matrix has {self.matrix.n} variables, expected {expected}"
            )

    @property
    def n_variables(self):
        return self.matrix.n

    @property
    def assets(self):
        return self.stats.assets

    def default_tolerance(self):
        if self.kind == PROXY:
            return PROXY_TOLERANCE
        return proposed_tolerance(self.discretization, self.stats)

    def decode(self, bits, tolerance=None, energy=None):
        """Decode a solver bitstring and attach energy, Sharpe and feasibility."""
        if self.kind == PROXY:
            sol = decode_proxy(bits, self.discretization, self.assets)
        else:
            sol = decode_proposed(bits, self.discretization, self.stats)
        if energy is None:
            energy = evaluate(self.matrix, sol.bits)
        tol = self.default_tolerance() if tolerance is None else tolerance
        sharpe = None
        if np.any(sol.weights > 0):
            try:
                sharpe = sharpe_ratio(sol.weights, self.stats)
            except ValueError:
                sharpe = None
        return PortfolioSolution(
            bits=sol.bits,
            weights=sol.weights,
            residual=sol.residual,
            y=sol.y,
            k=sol.k,
            sharpe=sharpe,
            feasible=feasibility(sol, self.kind, tol),
            energy=float(energy),
        )

    def metadata(self):
        return {
            "kind": self.kind,
            "lambda0": self.lambda0,
            "lambda1": self.lambda1,
            "assets": list(self.assets),
            "discretization": self.discretization.to_dict(),
            "mu_min": self.mu_min,
            "stats": self.stats.to_dict(),
        }

    def to_dict(self):
        data = self.matrix.to_dict()
        data["metadata"] = self.metadata()
        return data

    @classmethod
    def from_dict(cls, data):
        meta = data["metadata"]
        return cls(
            matrix=QuboMatrix.from_dict(data),
            kind=meta["kind"],
            discretization=Discretization(meta["discretization"]["coeffs"]),
            lambda0=float(meta["lambda0"]),
            lambda1=float(meta["lambda1"]),
            stats=AssetStats.from_dict(meta["stats"]),
            mu_min=meta.get("mu_min"),
        )


@dataclass(frozen=True, eq=False)
class PortfolioSolution:
    bits: np.ndarray
    weights: np.ndarray
    residual: float
    y: np.ndarray | None = None
    k: float | None = None
    sharpe: float | None = None
    feasible: bool = False
    energy: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def asset_count(self):
        return int(np.count_nonzero(self.weights > 0))

    def to_dict(self):
        return {
            "bits": [int(b) for b in self.bits],
            "weights": [float(w) for w in self.weights],
            "y": None if self.y is None else [float(v) for v in self.y],
            "k": self.k,
            "sharpe": self.sharpe,
            "feasible": bool(self.feasible),
            "residual": self.residual,
            "energy": self.energy,
            **self.extra,
        }

    @classmethod
    def from_dict(cls, data):
        known = {"bits", "weights", "y", "k", "sharpe", "feasible", "residual", "energy"}
        return cls(
            bits=np.array(data["bits"], dtype=np.int8),
            weights=np.array(data["weights"], dtype=float),
            residual=float(data["residual"]),
            y=None if data.get("y") is None else np.array(data["y"], dtype=float),
            k=data.get("k"),
            sharpe=data.get("sharpe"),
            feasible=bool(data.get("feasible", False)),
            energy=data.get("energy"),
            extra={key: v for key, v in data.items() if key not in known},
        )


def _check_stats(stats):
    if not np.all(stats.sigma > 0):
        bad = [a for a, s in zip(stats.assets, stats.sigma) if not s > 0]
        raise ValueError(f"zero volatility for assets {bad}")


def proxy_objective_qubo(stats, disc):
    """H0 for the proxy: -sum_i a_i w_i + sum_{i<j} rho_ij w_i w_j.

    The linear reward is negated so that minimizing the energy favours a
    high return-to-risk ratio; correlated pairs are penalized.
    """
    _check_stats(stats)
    d = disc.as_array()
    a = stats.mu / stats.sigma
    pair = np.triu(stats.corr, k=1)
    upper = np.kron(pair, np.outer(d, d))
    n = upper.shape[0]
    upper[np.diag_indices(n)] = -np.kron(a, d)
    return QuboMatrix(n, upper)


def proposed_objective_qubo(stats, disc):
    """H0 for the proposed formulation: y(x)^T Sigma y(x)."""
    c = disc.as_array()
    full = np.kron(stats.cov, np.outer(c, c))
    return QuboMatrix.from_matrix(full)


def build_proxy(stats, disc, lambda0, lambda1):
    if len(stats.mu) != stats.n_assets:
        raise DimensionError("stats are inconsistent")
    _check_lambdas(lambda0, lambda1)
    h0 = proxy_objective_qubo(stats, disc)
    h1 = equality_penalty(np.tile(disc.as_array(), stats.n_assets), 1.0)
    matrix = add_scaled(add_scaled(QuboMatrix.zeros(h0.n), lambda0, h0), lambda1, h1)
    return QuboModel(matrix, PROXY, disc, float(lambda0), float(lambda1), stats)


def _require_positive_mu(stats):
    bad = [a for a, m in zip(stats.assets, stats.mu) if not m > 0]
    if bad:
        raise AssumptionViolatedError(
            f"assumption violated: nonpositive expected return for {bad}"
        )


def build_proposed(stats, disc, lambda0, lambda1):
    _require_positive_mu(stats)
    _check_lambdas(lambda0, lambda1)
    h0 = proposed_objective_qubo(stats, disc)
    h1 = equality_penalty(np.kron(stats.mu, disc.as_array()), 1.0)
    matrix = add_scaled(add_scaled(QuboMatrix.zeros(h0.n), lambda0, h0), lambda1, h1)
    return QuboModel(
        matrix, PROPOSED, disc, float(lambda0), float(lambda1), stats,
        mu_min=float(np.min(stats.mu)),
    )


def build(kind, stats, lambda0, lambda1, K=9, H=None, step=0.1):
    """Build either formulation with its default discretization.

    For ``proposed``, ``H=None`` picks :func:`auto_bits` for the data's
    ``mu_min``, which is 12 when ``mu_min`` is 0.00245 and ``step`` is 0.1.
    """
    if kind == PROXY:
        return build_proxy(stats, proxy_discretization(K), lambda0, lambda1)
    if kind == PROPOSED:
        _require_positive_mu(stats)
        mu_min = float(np.min(stats.mu))
        if H is None:
            H = auto_bits(mu_min, step)
        disc = proposed_discretization(mu_min, step=step, H=H)
        return build_proposed(stats, disc, lambda0, lambda1)
    raise ValueError(f"unknown formulation kind {kind!r}")


def _check_lambdas(lambda0, lambda1):
    if not lambda0 > 0 or not lambda1 >= 0:
        raise ValueError("lambda0 must be > 0 and lambda1 >= 0")


def decode_proxy(bits, disc, assets):
    bits = np.asarray(bits).astype(np.int8)
    weights = disc.decode(bits, len(assets))
    return PortfolioSolution(
        bits=bits, weights=weights, residual=float(abs(weights.sum() - 1.0))
    )


def decode_proposed(bits, disc, stats):
    bits = np.asarray(bits).astype(np.int8)
    y = disc.decode(bits, stats.n_assets)
    k = float(y.sum())
    residual = float(abs(stats.mu @ y - 1.0))
    weights = y / k if k > 0 else np.zeros_like(y)
    return PortfolioSolution(bits=bits, weights=weights, residual=residual, y=y, k=k)


def proposed_tolerance(disc, stats):
    """Smallest discretization step times the smallest expected return."""
    return disc.min_coeff * float(np.min(stats.mu))


def feasibility(sol, kind, tolerance):
    if kind == PROPOSED and not (sol.k is not None and sol.k > 0):
        return False
    if kind not in KINDS:
        raise ValueError(f"unknown formulation kind {kind!r}")
    return bool(sol.residual <= tolerance)


def sharpe_ratio(w, stats):
    """w^T mu / sqrt(w^T Sigma w) with no risk-free adjustment."""
    w = np.asarray(w, dtype=float)
    if w.shape != (stats.n_assets,):
        raise DimensionError("weight vector length does not match assets")
    variance = float(w @ stats.cov @ w)
    if not np.any(w != 0) or not variance > 0:
        raise ValueError("zero variance portfolio")
    return float(w @ stats.mu) / np.sqrt(variance)
