"""
QUBO and Ising containers, energy evaluation, conversions and penalty terms.

A :class:`QuboMatrix` stores its coefficients as an upper-triangular CSR
matrix (diagonal included) plus a constant offset, so that

    E(x) = sum_{i <= j} Q_ij x_i x_j + offset

for a binary vector ``x``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError


def _canonical_upper(matrix, n):
    matrix = sp.csr_matrix(matrix, shape=(n, n), dtype=float)
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix


def _fold_upper(matrix):
    """Fold a square matrix into the equivalent upper triangle.

    x^T A x == x^T U x for binary x when U = diag(A) + triu(A + A^T, 1).
    """
    if sp.issparse(matrix):
        matrix = sp.csr_matrix(matrix, dtype=float)
        return sp.triu(matrix + matrix.T, k=1) + sp.diags(matrix.diagonal())
    matrix = np.asarray(matrix, dtype=float)
    upper = np.triu(matrix + matrix.T, k=1)
    upper[np.diag_indices_from(upper)] = np.diag(matrix)
    return upper


@dataclass(frozen=True, eq=False)
class QuboMatrix:
    n: int
    upper: sp.csr_matrix
    offset: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise DimensionError("n must be non-negative")
        upper = _canonical_upper(self.upper, self.n)
        if sp.tril(upper, k=-1).nnz:
            raise DimensionError("QuboMatrix must be upper triangular")
        for array in (upper.data, upper.indices, upper.indptr):
            array.flags.writeable = False
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def zeros(cls, n, offset=0.0):
        return cls(n, sp.csr_matrix((n, n)), offset)

    @classmethod
    def from_entries(cls, n, entries, offset=0.0):
        """Build from ``{(i, j): value}`` or an iterable of ``(i, j, value)``.

        Pairs with ``i > j`` are mirrored to ``(j, i)`` and duplicates sum.
        """
        if isinstance(entries, dict):
            entries = [(i, j, v) for (i, j), v in entries.items()]
        table = np.asarray(list(entries), dtype=float).reshape(-1, 3)
        rows = table[:, 0].astype(np.int64)
        cols = table[:, 1].astype(np.int64)
        if np.any(rows != table[:, 0]) or np.any(cols != table[:, 1]):
            raise DimensionError("entry indices must be integers")
        rows, cols = np.minimum(rows, cols), np.maximum(rows, cols)
        if rows.size and (rows.min() < 0 or cols.max() >= n):
            raise DimensionError(f"index pair out of range for n={n}")
        upper = sp.coo_matrix((table[:, 2], (rows, cols)), shape=(n, n))
        return cls(n, upper, offset)

    @classmethod
    def from_matrix(cls, matrix, offset=0.0):
        """Build from any square (dense or sparse) matrix A with E = x^T A x."""
        n = matrix.shape[0]
        if matrix.shape != (n, n):
            raise DimensionError("matrix must be square")
        return cls(n, _fold_upper(matrix), offset)

    @property
    def entries(self):
        """Dict view ``{(i, j): value}`` of the stored coefficients."""
        coo = self.upper.tocoo()
        return {
            (int(i), int(j)): float(v) for i, j, v in zip(coo.row, coo.col, coo.data)
        }

    @property
    def nnz(self):
        return self.upper.nnz

    @property
    def density(self):
        total = self.n * (self.n + 1) // 2
        return self.nnz / total if total else 0.0

    def diagonal(self):
        return self.upper.diagonal()

    def to_dense(self):
        return self.upper.toarray()

    def symmetric_couplings(self):
        """Off-diagonal couplings mirrored into a symmetric CSR matrix."""
        off = sp.triu(self.upper, k=1)
        sym = sp.csr_matrix(off + off.T)
        sym.sort_indices()
        return sym

    def energy(self, x):
        return evaluate(self, x)

    def to_dict(self):
        coo = self.upper.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return {
            "n": self.n,
            "offset": self.offset,
            "entries": [
                [int(coo.row[k]), int(coo.col[k]), float(coo.data[k])] for k in order
            ],
        }

    @classmethod
    def from_dict(cls, data):
        return cls.from_entries(int(data["n"]), data["entries"], data.get("offset", 0.0))


@dataclass(frozen=True, eq=False)
class IsingModel:
    """E(S) = sum_i h_i S_i + sum_{i<j} J_ij S_i S_j + offset, S in {-1, 1}^n."""

    n: int
    h: np.ndarray
    J: sp.csr_matrix
    offset: float = 0.0

    def __post_init__(self):
        h = np.array(self.h, dtype=float).reshape(-1)
        if h.shape != (self.n,):
            raise DimensionError("h length does not match n")
        J = _canonical_upper(self.J, self.n)
        if sp.tril(J).nnz:
            raise DimensionError("J must be strictly upper triangular")
        h.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_couplers(cls, h, couplers, offset=0.0):
        """Build from a bias vector and ``{(i, j): J_ij}`` with ``i != j``."""
        h = np.asarray(h, dtype=float)
        n = h.shape[0]
        rows, cols, vals = [], [], []
        for (i, j), v in couplers.items():
            if i == j:
                raise DimensionError("couplers must join distinct spins")
            rows.append(min(i, j))
            cols.append(max(i, j))
            vals.append(float(v))
        return cls(n, h, sp.coo_matrix((vals, (rows, cols)), shape=(n, n)), offset)

    def energy(self, spins):
        s = np.asarray(spins, dtype=float)
        if s.shape != (self.n,):
            raise DimensionError(f"expected {self.n} spins, got {s.shape}")
        return float(self.h @ s + s @ (self.J @ s) + self.offset)


def _as_bits(Q, x):
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] != Q.n:
        raise DimensionError(f"bitstring length {x.shape} does not match n={Q.n}")
    if not np.all((x == 0) | (x == 1)):
        raise ValueError("bitstring entries must be 0 or 1")
    return x.astype(float)


def evaluate(Q, x):
    """Energy ``sum_{i<=j} Q_ij x_i x_j + offset`` of bitstring ``x``."""
    x = _as_bits(Q, x)
    return float(x @ (Q.upper @ x) + Q.offset)


def evaluate_many(Q, X):
    """Energies for a stack of bitstrings with shape ``(m, n)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != Q.n:
        raise DimensionError("expected an (m, n) array of bitstrings")
    return np.einsum("ij,ij->i", X, (Q.upper @ X.T).T) + Q.offset


def ising_to_qubo(model):
    """Substitute S = 2x - 1; energies agree on every assignment."""
    J = model.J
    Js = J + J.T
    linear = 2.0 * model.h - 2.0 * np.asarray(Js.sum(axis=1)).ravel()
    upper = 4.0 * J + sp.diags(linear)
    offset = model.offset - model.h.sum() + J.sum()
    return QuboMatrix(model.n, upper, offset)


def qubo_to_ising(Q):
    """Substitute x = (S + 1) / 2; inverse of :func:`ising_to_qubo`."""
    diag = Q.diagonal()
    off = sp.triu(Q.upper, k=1)
    J = 0.25 * off
    row = np.asarray(off.sum(axis=1)).ravel()
    col = np.asarray(off.sum(axis=0)).ravel()
    h = 0.5 * diag + 0.25 * (row + col)
    offset = Q.offset + 0.5 * diag.sum() + 0.25 * off.sum()
    return IsingModel(Q.n, h, J, offset)


def add_scaled(accumulator, lam, term):
    """Return ``accumulator + lam * term`` (energies add linearly)."""
    if accumulator.n != term.n:
        raise DimensionError(
            f"cannot add QUBOs of size {accumulator.n} and {term.n}"
        )
    return QuboMatrix(
        accumulator.n,
        accumulator.upper + lam * term.upper,
        accumulator.offset + lam * term.offset,
    )


def equality_penalty(coeffs, target):
    """QUBO whose energy is ``(coeffs . x - target)**2`` for every binary x.

    Squares fold into the diagonal because x_i**2 == x_i.
    """
    a = np.asarray(coeffs, dtype=float).ravel()
    n = a.shape[0]
    upper = np.triu(2.0 * np.outer(a, a), k=1)
    upper[np.diag_indices(n)] = a * a - 2.0 * target * a
    return QuboMatrix(n, upper, float(target) ** 2)


def write_qubo_json(Q, fh, metadata=None):
    """Stream the JSON form of ``Q`` (plus an optional metadata block).

    Produces the same document as ``json.dumps(Q.to_dict())`` without
    materializing millions of small lists.
    """
    coo = Q.upper.tocoo()
    order = np.lexsort((coo.col, coo.row))
    rows = coo.row[order].tolist()
    cols = coo.col[order].tolist()
    vals = coo.data[order].tolist()
    fh.write(f'{{"n": {Q.n}, "offset": {json.dumps(Q.offset)}, "entries": [')
    chunk = 100_000
    for start in range(0, len(vals), chunk):
        if start:
            fh.write(", ")
        fh.write(
            ", ".join(
                f"[{i}, {j}, {v!r}]"
                for i, j, v in zip(
                    rows[start : start + chunk],
                    cols[start : start + chunk],
                    vals[start : start + chunk],
                )
            )
        )
    fh.write("]")
    if metadata is not None:
        fh.write(', "metadata": ')
        fh.write(json.dumps(metadata, allow_nan=False))
    fh.write("}\n")


def save_qubo_json(Q, path, metadata=None):
    with open(path, "w", encoding="utf-8") as fh:
        write_qubo_json(Q, fh, metadata)


def load_qubo_json(path):
    return QuboMatrix.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_qubo_text(Q, path):
    """Plain ``i j value`` triplets with a ``# offset <v>`` header line."""
    lines = [f"# offset {Q.offset!r}", f"# n {Q.n}"]
    lines += [f"{i} {j} {v!r}" for i, j, v in Q.to_dict()["entries"]]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_qubo_text(path, n=None):
    offset = 0.0
    entries = []
    declared = None
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "offset":
                offset = float(parts[1])
            elif len(parts) == 2 and parts[0] == "n":
                declared = int(parts[1])
            continue
        i, j, v = line.split()
        entries.append((int(i), int(j), float(v)))
    if n is None:
        n = declared
    if n is None:
        n = 1 + max((max(i, j) for i, j, _ in entries), default=-1)
    return QuboMatrix.from_entries(n, entries, offset)
