"""Compiled single-flip kernels shared by the QUBO solvers.

Every kernel takes the QUBO split into its diagonal ``lin`` and the
symmetric off-diagonal couplings in CSR form ``(indptr, indices, data)``.
Flipping bit ``i`` changes the energy by ``(1 - 2 x_i) * (lin_i + field_i)``
where ``field_i = sum_j W_ij x_j`` is kept up to date incrementally.
Energies returned here exclude the constant offset.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _random_bits(n):
    x = np.zeros(n, np.int8)
    for i in range(n):
        if np.random.random() < 0.5:
            x[i] = 1
    return x


@njit(cache=True, nogil=True)
def _local_fields(x, indptr, indices, data):
    n = x.shape[0]
    field = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            if x[indices[p]]:
                acc += data[p]
        field[i] = acc
    return field


@njit(cache=True, nogil=True)
def _energy(x, lin, field):
    e = 0.0
    for i in range(x.shape[0]):
        if x[i]:
            e += lin[i] + 0.5 * field[i]
    return e


@njit(cache=True, nogil=True)
def _flip(x, j, field, indptr, indices, data):
    sign = 1.0 if x[j] == 0 else -1.0
    x[j] = 1 - x[j]
    for p in range(indptr[j], indptr[j + 1]):
        field[indices[p]] += sign * data[p]


@njit(cache=True, nogil=True)
def anneal(lin, indptr, indices, data, betas, seed):
    """Metropolis sweeps over a beta schedule; returns the best state seen."""
    np.random.seed(seed)
    n = lin.shape[0]
    x = _random_bits(n)
    field = _local_fields(x, indptr, indices, data)
    energy = _energy(x, lin, field)
    best = energy
    best_x = x.copy()
    for s in range(betas.shape[0]):
        beta = betas[s]
        for i in range(n):
            delta = (1.0 - 2.0 * x[i]) * (lin[i] + field[i])
            if delta <= 0.0 or np.random.random() < np.exp(-beta * delta):
                _flip(x, i, field, indptr, indices, data)
                energy += delta
        if energy < best:
            best = energy
            best_x[:] = x
    # greedy descent so the final state is a single-flip local minimum
    moved = True
    while moved:
        moved = False
        for i in range(n):
            delta = (1.0 - 2.0 * x[i]) * (lin[i] + field[i])
            if delta < 0.0:
                _flip(x, i, field, indptr, indices, data)
                energy += delta
                moved = True
    if energy < best:
        best_x[:] = x
        best = energy
    return best_x, best


@njit(cache=True, nogil=True)
def tabu(lin, indptr, indices, data, iterations, tenure, seed):
    """Steepest single-flip tabu search with aspiration on the incumbent."""
    np.random.seed(seed)
    n = lin.shape[0]
    x = _random_bits(n)
    field = _local_fields(x, indptr, indices, data)
    energy = _energy(x, lin, field)
    delta = np.empty(n)
    for i in range(n):
        delta[i] = (1.0 - 2.0 * x[i]) * (lin[i] + field[i])
    tabu_until = np.zeros(n, np.int64)
    best = energy
    best_x = x.copy()
    for it in range(iterations):
        j = -1
        jd = np.inf
        fallback = 0
        for i in range(n):
            if delta[i] < delta[fallback]:
                fallback = i
            allowed = tabu_until[i] <= it or energy + delta[i] < best
            if allowed and delta[i] < jd:
                jd = delta[i]
                j = i
        if j < 0:
            j = fallback
        sign = 1.0 if x[j] == 0 else -1.0
        energy += delta[j]
        x[j] = 1 - x[j]
        delta[j] = -delta[j]
        for p in range(indptr[j], indptr[j + 1]):
            k = indices[p]
            field[k] += sign * data[p]
            delta[k] = (1.0 - 2.0 * x[k]) * (lin[k] + field[k])
        tabu_until[j] = it + 1 + tenure
        if energy < best:
            best = energy
            best_x[:] = x
    return best_x, best


@njit(cache=True, nogil=True)
def gray_enumerate(lin, indptr, indices, data, tol):
    """Exact minimum over all 2**n states in Gray-code order.

    States are encoded as integers with bit ``i`` holding ``x_i``; among
    energies within ``tol`` of each other the smaller integer wins.
    """
    n = lin.shape[0]
    x = np.zeros(n, np.int8)
    field = np.zeros(n)
    energy = 0.0
    code = np.int64(0)
    best = 0.0
    best_code = np.int64(0)
    total = np.int64(1) << n
    for g in range(1, total):
        j = 0
        while not (g >> j) & 1:
            j += 1
        energy += (1.0 - 2.0 * x[j]) * (lin[j] + field[j])
        _flip(x, j, field, indptr, indices, data)
        code ^= np.int64(1) << j
        if energy < best - tol:
            best = energy
            best_code = code
        elif energy <= best + tol and code < best_code:
            best_code = code
            if energy < best:
                best = energy
    return best_code, best
