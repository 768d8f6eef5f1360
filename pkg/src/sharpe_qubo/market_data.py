"""
Price ingestion and the statistics that feed both QUBO formulations.

The pipeline is: ``load_prices`` -> ``clean_panel`` -> ``simple_returns`` /
``log_returns`` -> ``annualized_stats`` -> ``filter_positive_mu``.
``normality_score`` ranks the two return kinds by how Gaussian they look.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist

import numpy as np

from .errors import (
    DegenerateAssetError,
    EmptyFileError,
    EmptyPanelError,
    InsufficientDataError,
    InvalidPriceError,
    LogReturnUndefinedError,
    MalformedHeaderError,
    NoInvestableAssetsError,
    NonMonotonicDatesError,
)

TRADING_DAYS = 252


def _frozen(array):
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class PricePanel:
    """Dated matrix of adjusted close prices; missing cells are NaN."""

    dates: tuple
    assets: tuple
    prices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "prices", _frozen(self.prices))
        if self.prices.shape != (len(self.dates), len(self.assets)):
            raise ValueError(
                f"prices shape {self.prices.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise NonMonotonicDatesError("non-monotonic dates")
        observed = np.sum(~np.isnan(self.prices), axis=0)
        for ticker, count in zip(self.assets, observed):
            if count < 2:
                raise InsufficientDataError(
                    f"asset {ticker} has fewer than 2 observed prices"
                )

    @property
    def missing_mask(self):
        return np.isnan(self.prices)

    def is_dense(self):
        return not self.missing_mask.any()


@dataclass(frozen=True)
class ReturnPanel:
    dates: tuple
    assets: tuple
    returns: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in ("simple", "log"):
            raise ValueError(f"unknown return kind {self.kind!r}")
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "returns", _frozen(self.returns))
        if self.returns.shape != (len(self.dates), len(self.assets)):
            raise ValueError("returns shape does not match dates x assets")
        if np.isnan(self.returns).any():
            raise ValueError("return panel may not contain missing entries")


@dataclass(frozen=True)
class AssetStats:
    """Annualized expected returns, volatilities, covariance and correlation."""

    assets: tuple
    mu: np.ndarray
    sigma: np.ndarray
    cov: np.ndarray
    corr: np.ndarray
    frequency: int = TRADING_DAYS

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        for name in ("mu", "sigma", "cov", "corr"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = len(self.assets)
        if self.mu.shape != (n,) or self.sigma.shape != (n,):
            raise ValueError("mu/sigma length does not match assets")
        if self.cov.shape != (n, n) or self.corr.shape != (n, n):
            raise ValueError("cov/corr shape does not match assets")

    @property
    def n_assets(self):
        return len(self.assets)

    @classmethod
    def from_cov(cls, assets, mu, cov, frequency=TRADING_DAYS):
        """Derive sigma and corr from a covariance matrix."""
        cov = np.asarray(cov, dtype=float)
        cov = 0.5 * (cov + cov.T)
        variances = np.diag(cov)
        for ticker, var in zip(assets, variances):
            if not var > 0.0:
                raise DegenerateAssetError(ticker)
        sigma = np.sqrt(variances)
        corr = cov / np.outer(sigma, sigma)
        corr = np.clip(corr, -1.0, 1.0)
        np.fill_diagonal(corr, 1.0)
        return cls(assets, mu, sigma, cov, corr, int(frequency))

    def subset(self, keep):
        """Restrict to the assets selected by the boolean mask ``keep``."""
        keep = np.asarray(keep, dtype=bool)
        idx = np.flatnonzero(keep)
        return AssetStats(
            tuple(self.assets[i] for i in idx),
            self.mu[idx],
            self.sigma[idx],
            self.cov[np.ix_(idx, idx)],
            self.corr[np.ix_(idx, idx)],
            self.frequency,
        )

    def to_dict(self):
        return {
            "assets": list(self.assets),
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
            "cov": self.cov.tolist(),
            "corr": self.corr.tolist(),
            "frequency": self.frequency,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            data["assets"],
            data["mu"],
            data["sigma"],
            data["cov"],
            data["corr"],
            int(data.get("frequency", TRADING_DAYS)),
        )


def _parse_price(cell):
    cell = cell.strip()
    if not cell:
        return math.nan
    try:
        value = float(cell)
    except ValueError:
        return math.nan
    return value if math.isfinite(value) else math.nan


def load_prices(source):
    """Read a price CSV with a ``date`` column followed by one column per ticker.

    Empty or unparseable cells become NaN. Raises ``EmptyFileError``,
    ``MalformedHeaderError`` or ``NonMonotonicDatesError``.
    """
    text = Path(source).read_text(encoding="utf-8-sig")
    rows = [row for row in csv.reader(text.splitlines()) if any(c.strip() for c in row)]
    if not rows:
        raise EmptyFileError(f"empty file: {source}")

    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0].lower() != "date":
        raise MalformedHeaderError(
            "malformed header: first column must be 'date' followed by tickers"
        )
    tickers = header[1:]
    if any(not t for t in tickers) or len(set(tickers)) != len(tickers):
        raise MalformedHeaderError("malformed header: empty or duplicate ticker")
    if len(rows) == 1:
        raise EmptyFileError(f"no price rows in {source}")

    dates = []
    prices = np.full((len(rows) - 1, len(tickers)), np.nan)
    for r, row in enumerate(rows[1:]):
        try:
            dates.append(dt.date.fromisoformat(row[0].strip()))
        except ValueError as exc:
            raise MalformedHeaderError(f"row {r + 2}: bad date {row[0]!r}") from exc
        for c, cell in enumerate(row[1 : len(tickers) + 1]):
            prices[r, c] = _parse_price(cell)

    if any(b <= a for a, b in zip(dates, dates[1:])):
        raise NonMonotonicDatesError("non-monotonic dates")
    return PricePanel(dates, tickers, prices)


def _longest_missing_run(column):
    longest = run = 0
    for missing in column:
        run = run + 1 if missing else 0
        longest = max(longest, run)
    return longest


def clean_panel(panel, max_consecutive_missing=1):
    """Drop assets with long gaps and forward-fill the isolated ones.

    An asset is dropped when it has more than ``max_consecutive_missing``
    consecutive missing prices. Leading rows in which a surviving asset has
    not been observed yet are removed, so the result is dense.
    """
    if max_consecutive_missing < 1:
        raise ValueError("max_consecutive_missing must be >= 1")
    mask = panel.missing_mask
    keep = [
        j
        for j in range(len(panel.assets))
        if _longest_missing_run(mask[:, j]) <= max_consecutive_missing
    ]
    if not keep:
        raise EmptyPanelError("empty panel after cleaning")

    prices = panel.prices[:, keep].copy()
    observed = ~np.isnan(prices)
    start = int(max(np.argmax(observed[:, j]) for j in range(prices.shape[1])))
    prices = prices[start:]
    for t in range(1, prices.shape[0]):
        gaps = np.isnan(prices[t])
        prices[t, gaps] = prices[t - 1, gaps]
    if prices.shape[0] < 2:
        raise EmptyPanelError("empty panel after cleaning")
    return PricePanel(panel.dates[start:], [panel.assets[j] for j in keep], prices)


def simple_returns(panel):
    if not panel.is_dense():
        raise ValueError("panel has missing entries; run clean_panel first")
    prices = panel.prices
    if (prices <= 0).any():
        raise InvalidPriceError("invalid price: prices must be strictly positive")
    returns = (prices[1:] - prices[:-1]) / prices[:-1]
    return ReturnPanel(panel.dates[1:], panel.assets, returns, "simple")


def log_returns(panel):
    if not panel.is_dense():
        raise ValueError("panel has missing entries; run clean_panel first")
    if (panel.prices <= 0).any():
        raise LogReturnUndefinedError("log-return undefined: non-positive price")
    simple = simple_returns(panel)
    if (simple.returns <= -1.0).any():
        raise LogReturnUndefinedError("log-return undefined: simple return <= -1")
    return ReturnPanel(simple.dates, simple.assets, np.log1p(simple.returns), "log")


def annualized_mean(returns, frequency=TRADING_DAYS):
    """Per-asset sample mean scaled by ``frequency``."""
    return returns.returns.mean(axis=0) * frequency


def annualized_stats(returns, frequency=TRADING_DAYS):
    """Annualized mean and sample covariance (denominator n - 1).

    Raises ``DegenerateAssetError`` for a zero-variance asset.
    """
    data = returns.returns
    if data.shape[0] < 2:
        raise InsufficientDataError("need at least 2 return rows")
    if frequency < 1:
        raise ValueError("frequency must be >= 1")
    for ticker, spread in zip(returns.assets, np.ptp(data, axis=0)):
        if spread == 0:
            raise DegenerateAssetError(ticker)
    mu = annualized_mean(returns, frequency)
    cov = np.atleast_2d(np.cov(data, rowvar=False, ddof=1)) * frequency
    return AssetStats.from_cov(returns.assets, mu, cov, frequency)


def filter_positive_mu(stats):
    keep = stats.mu > 0
    if not keep.any():
        raise NoInvestableAssetsError("no investable assets: every mu <= 0")
    if keep.all():
        return stats
    return stats.subset(keep)


@dataclass(frozen=True)
class NormalityReport:
    kind: str
    assets: tuple
    jarque_bera: np.ndarray
    skewness: np.ndarray
    excess_kurtosis: np.ndarray

    @property
    def pooled(self):
        """Mean of the per-asset statistics."""
        return float(np.mean(self.jarque_bera))

    def to_dict(self):
        return {
            "kind": self.kind,
            "pooled": self.pooled,
            "assets": list(self.assets),
            "jarque_bera": self.jarque_bera.tolist(),
            "skewness": self.skewness.tolist(),
            "excess_kurtosis": self.excess_kurtosis.tolist(),
        }


def jarque_bera(sample):
    """Jarque-Bera statistic of a 1-d sample (lower is closer to Gaussian)."""
    return float(_moment_stats(np.asarray(sample, dtype=float)[:, None])[0][0])


def _moment_stats(data):
    n = data.shape[0]
    centered = data - data.mean(axis=0)
    m2 = np.mean(centered**2, axis=0)
    m3 = np.mean(centered**3, axis=0)
    m4 = np.mean(centered**4, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        skew = np.where(m2 > 0, m3 / m2**1.5, 0.0)
        excess = np.where(m2 > 0, m4 / m2**2 - 3.0, 0.0)
    jb = n / 6.0 * (skew**2 + excess**2 / 4.0)
    return jb, skew, excess


def normality_score(returns):
    if returns.returns.shape[0] < 8:
        raise InsufficientDataError("normality score needs at least 8 return rows")
    jb, skew, excess = _moment_stats(returns.returns)
    return NormalityReport(returns.kind, returns.assets, jb, skew, excess)


def qq_points(returns, n_points=101):
    """Theoretical vs empirical quantiles of the pooled standardized returns.

    Each asset is z-scored before pooling; the output is an ``(n_points, 2)``
    array of (normal quantile, empirical quantile) pairs for QQ plots.
    """
    data = returns.returns
    std = data.std(axis=0, ddof=1)
    std[std == 0] = 1.0
    pooled = ((data - data.mean(axis=0)) / std).ravel()
    probs = (np.arange(1, n_points + 1) - 0.5) / n_points
    normal = NormalDist()
    theoretical = np.array([normal.inv_cdf(p) for p in probs])
    empirical = np.quantile(pooled, probs)
    return np.column_stack([theoretical, empirical])
