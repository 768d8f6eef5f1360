"""Seeded geometric-Brownian-motion price panels for demos and tests."""

import csv
import datetime as dt

import numpy as np

from .market_data import TRADING_DAYS, PricePanel


def business_days(start, count):
    days = []
    day = start
    while len(days) < count:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return days


def synth_prices(
    n_assets=10,
    n_days=756,
    seed=0,
    drift=(0.08, 0.30),
    vol=(0.12, 0.30),
    factor_loading=(0.2, 0.7),
    start=dt.date(2013, 1, 2),
    tickers=None,
):
    """One-factor correlated GBM closes, ``n_days`` business days long.

    Drifts, volatilities and market-factor loadings are drawn uniformly from
    the given (annualized) ranges.
    """
    rng = np.random.default_rng(seed)
    mu = rng.uniform(*drift, n_assets)
    sigma = rng.uniform(*vol, n_assets)
    beta = rng.uniform(*factor_loading, n_assets)
    dt_year = 1.0 / TRADING_DAYS

    market = rng.standard_normal(n_days - 1)
    idio = rng.standard_normal((n_days - 1, n_assets))
    shocks = beta * market[:, None] + np.sqrt(1.0 - beta**2) * idio
    log_steps = (mu - 0.5 * sigma**2) * dt_year + sigma * np.sqrt(dt_year) * shocks

    start_prices = rng.uniform(20.0, 200.0, n_assets)
    paths = np.vstack([np.zeros(n_assets), np.cumsum(log_steps, axis=0)])
    prices = np.round(start_prices * np.exp(paths), 6)
    if tickers is None:
        tickers = [f"SYN{i:03d}" for i in range(n_assets)]
    return PricePanel(business_days(start, n_days), tickers, prices)


def write_prices_csv(panel, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", *panel.assets])
        for date, row in zip(panel.dates, panel.prices):
            writer.writerow(
                [date.isoformat(), *("" if np.isnan(p) else repr(float(p)) for p in row)]
            )
