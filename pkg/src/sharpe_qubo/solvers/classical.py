"""
Continuous Max-Sharpe baseline.

With ``mu > 0`` and no risk-free rate, maximizing ``w^T mu / sqrt(w^T Sigma w)``
over the long-only simplex is equivalent to the convex QP

    min  y^T Sigma y    s.t.  mu^T y = 1,  y >= 0

followed by ``w = y / sum(y)``. When the unconstrained tangency portfolio
``Sigma^{-1} mu`` is already nonnegative it is the answer; otherwise the QP
is solved by accelerated projected gradient descent.
"""

import numpy as np

from ..errors import AssumptionViolatedError, ConvergenceError


def tangency_closed_form(mu, cov):
    """``y = Sigma^{-1} mu / (mu^T Sigma^{-1} mu)``, or ``None`` if Sigma is singular."""
    mu = np.asarray(mu, dtype=float)
    cov = np.asarray(cov, dtype=float)
    try:
        z = np.linalg.solve(cov, mu)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(z)) or np.linalg.cond(cov) > 1e12:
        return None
    return z / (mu @ z)


def project_budget_simplex(v, mu):
    """Euclidean projection of ``v`` onto ``{y >= 0, mu^T y = 1}`` for ``mu > 0``.

    The solution has the form ``max(v - theta * mu, 0)``; ``theta`` is found
    exactly by scanning the sorted breakpoints ``v_i / mu_i``.
    """
    v = np.asarray(v, dtype=float)
    mu = np.asarray(mu, dtype=float)
    breaks = v / mu
    order = np.argsort(-breaks, kind="stable")
    m_sorted = mu[order]
    theta = (np.cumsum(m_sorted * v[order]) - 1.0) / np.cumsum(m_sorted**2)
    active = np.flatnonzero(theta < breaks[order])
    t = theta[active[-1]]
    return np.maximum(v - t * mu, 0.0)


def project_budget_simplex_dykstra(v, mu, tol=1e-14, max_iters=100000):
    """Same projection by Dykstra's alternating scheme (hyperplane, orthant)."""
    v = np.asarray(v, dtype=float)
    mu = np.asarray(mu, dtype=float)
    mu_sq = mu @ mu
    x = v.copy()
    p = np.zeros_like(v)
    q = np.zeros_like(v)
    for _ in range(max_iters):
        z = x + p
        y = z - (mu @ z - 1.0) / mu_sq * mu
        p = z - y
        z = y + q
        x_new = np.maximum(z, 0.0)
        q = z - x_new
        if np.max(np.abs(x_new - x)) <= tol * max(1.0, np.max(np.abs(x_new))):
            return x_new
        x = x_new
    raise ConvergenceError("Dykstra projection did not converge", last_iterate=x)


def _pgd(mu, cov, max_iters, tol, project):
    # FISTA with gradient-based adaptive restart
    lipschitz = 2.0 * float(np.max(np.linalg.eigvalsh(cov)))
    if not lipschitz > 0:
        raise ConvergenceError("covariance has no positive curvature")
    step = 1.0 / lipschitz
    y = project(np.ones_like(mu) / mu.sum(), mu)
    z = y.copy()
    t = 1.0
    for _ in range(max_iters):
        y_new = project(z - step * 2.0 * (cov @ z), mu)
        change = np.max(np.abs(y_new - y))
        if change <= tol * max(1.0, np.max(np.abs(y_new))):
            return y_new
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        if (z - y_new) @ (y_new - y) > 0:
            t_new = 1.0
            z = y_new.copy()
        else:
            z = y_new + (t - 1.0) / t_new * (y_new - y)
        y, t = y_new, t_new
    raise ConvergenceError(
        f"projected gradient did not converge in {max_iters} iterations",
        last_iterate=y / y.sum(),
    )


def classical_max_sharpe(
    stats, max_iters=200_000, tol=1e-13, method="auto", projection="exact"
):
    """Long-only tangency portfolio for ``stats``; returns weights summing to 1.

    ``method`` is ``"auto"`` (closed form when nonnegative, else projected
    gradient), ``"closed_form"`` or ``"pgd"``. ``projection`` selects the
    exact breakpoint projection or Dykstra's alternating projections.
    """
    mu = np.asarray(stats.mu, dtype=float)
    cov = np.asarray(stats.cov, dtype=float)
    if not np.all(mu > 0):
        raise AssumptionViolatedError("classical baseline requires mu > 0 for every asset")
    if mu.shape[0] == 1:
        return np.ones(1)
    if method not in ("auto", "closed_form", "pgd"):
        raise ValueError(f"unknown method {method!r}")

    if method in ("auto", "closed_form"):
        y = tangency_closed_form(mu, cov)
        if y is not None and np.all(y >= 0):
            return y / y.sum()
        if method == "closed_form":
            raise ValueError("closed-form tangency portfolio is not long-only")

    project = project_budget_simplex if projection == "exact" else project_budget_simplex_dykstra
    y = _pgd(mu, cov, max_iters, tol, project)
    return y / y.sum()
