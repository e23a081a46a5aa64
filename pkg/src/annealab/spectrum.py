"""Instantaneous spectra of H(s) = a(s) H_problem + b(s) H_driver.

H_problem is diagonal in the computational basis (entry = QUBO energy of the
basis bitstring, offset included). The driver is +sum_j sigma^x_j, applied
matrix-free by bit flips; its ground eigenvalue is -n. Note the + sign follows
the source convention for the driver; it flips the driver spectrum relative to
the more common -sum sigma^x but leaves every measurement probability and gap
structure unchanged.

Basis convention: variable i is bit i (little endian) of the basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .coloring_qubo import QuboProblem
from .schedules import Schedule

DENSE_QUBIT_LIMIT = 12
QUBIT_CAP = 20


class SpectrumError(RuntimeError):
    """Eigensolver failure or unusable spectrum table."""


@dataclass(frozen=True)
class ProblemDiagonal:
    """The 2^n diagonal of the problem Hamiltonian."""

    n_qubits: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (1 << self.n_qubits,):
            raise ValueError(f"need 2^{self.n_qubits} diagonal entries, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @cached_property
    def bounds(self) -> tuple[float, float]:
        return float(self.values.min()), float(self.values.max())


def build_problem_diagonal(q: QuboProblem, cap: int = QUBIT_CAP) -> ProblemDiagonal:
    """Tabulate qubo_energy(x) for every basis state x. Guarded at `cap` qubits."""
    if q.n_vars > cap:
        raise ValueError(f"diagonal construction capped at {cap} qubits, got {q.n_vars}")
    r = np.arange(1 << q.n_vars, dtype=np.uint32)
    vals = np.full(r.shape, float(q.offset))
    for i, j, v in q.q:
        if i == j:
            vals += v * ((r >> i) & 1)
        else:
            vals += v * (((r >> i) & 1) & ((r >> j) & 1))
    return ProblemDiagonal(q.n_vars, vals)


def driver_apply(state: np.ndarray) -> np.ndarray:
    """(sum_j sigma^x_j) |state>: superpose all single-bit-flip images."""
    dim = state.shape[0]
    n = dim.bit_length() - 1
    out = np.zeros_like(state)
    for j in range(n):
        v = state.reshape(-1, 2, 1 << j)
        out += v[:, ::-1, :].reshape(dim)
    return out


def apply_hamiltonian(s: float, sched: Schedule, diag: ProblemDiagonal, state: np.ndarray) -> np.ndarray:
    """H(s)|state>, matrix-free in O(n 2^n)."""
    if state.shape != diag.values.shape:
        raise ValueError(f"state shape {state.shape} does not match {diag.values.shape}")
    a = float(sched.a(s))
    b = float(sched.b(s))
    out = (a * diag.values) * state
    if b != 0.0:
        out = out + b * driver_apply(state)
    return out


def dense_hamiltonian(s: float, sched: Schedule, diag: ProblemDiagonal) -> np.ndarray:
    if diag.n_qubits > DENSE_QUBIT_LIMIT:
        raise ValueError(f"dense matrix limited to {DENSE_QUBIT_LIMIT} qubits")
    dim = 1 << diag.n_qubits
    idx = np.arange(dim)
    h = np.zeros((dim, dim))
    h[idx, idx] = float(sched.a(s)) * diag.values
    b = float(sched.b(s))
    for j in range(diag.n_qubits):
        h[idx, idx ^ (1 << j)] += b
    return h


def lowest_eigenvalues(s: float, sched: Schedule, diag: ProblemDiagonal, m: int = 15) -> np.ndarray:
    """The m smallest eigenvalues of H(s), ascending, degeneracies retained.

    Dense (partial) diagonalization up to 12 qubits; above that, an iterative
    extremal solver on the matrix-free operator with deterministic seeded
    restarts.
    """
    dim = 1 << diag.n_qubits
    if not 1 <= m <= dim:
        raise ValueError(f"need 1 <= m <= {dim}, got {m}")
    if diag.n_qubits <= DENSE_QUBIT_LIMIT:
        h = dense_hamiltonian(s, sched, diag)
        return scipy.linalg.eigh(h, eigvals_only=True, subset_by_index=(0, m - 1))
    a = float(sched.a(s))
    b = float(sched.b(s))
    op = LinearOperator(
        (dim, dim),
        matvec=lambda x: (a * diag.values) * x + b * driver_apply(x),
        dtype=np.float64,
    )
    last_residual = np.nan
    for attempt in range(3):
        v0 = np.random.default_rng(20_000 + attempt).standard_normal(dim)
        try:
            vals = eigsh(
                op,
                k=m,
                which="SA",
                v0=v0,
                ncv=min(dim - 1, max(2 * m + 1, 40)),
                maxiter=50 * dim,
                return_eigenvectors=False,
            )
            return np.sort(vals)
        except ArpackNoConvergence as err:
            if getattr(err, "eigenvalues", None) is not None and len(err.eigenvalues):
                vecs, vals_part = err.eigenvectors, err.eigenvalues
                res = op.matvec(vecs[:, 0]) - vals_part[0] * vecs[:, 0]
                last_residual = float(np.linalg.norm(res))
    raise SpectrumError(
        f"extremal eigensolver failed to converge after 3 seeded restarts "
        f"(last residual norm {last_residual:.3e})"
    )


@dataclass(frozen=True)
class SpectrumTable:
    """Lowest-m eigenvalues tabulated over an s grid."""

    grid: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        lv = np.asarray(self.levels, dtype=np.float64)
        if lv.ndim != 2 or lv.shape[0] != g.shape[0]:
            raise ValueError("levels must be (len(grid), m)")
        if np.any(np.diff(lv, axis=1) < -1e-9):
            raise ValueError("levels must be non-decreasing within each row")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "levels", lv)

    @property
    def m(self) -> int:
        return self.levels.shape[1]

    def to_csv(self, path: str | Path) -> None:
        header = "s," + ",".join(f"level_{i}" for i in range(self.m))
        with open(path, "w") as f:
            f.write(header + "\n")
            for s, row in zip(self.grid, self.levels):
                f.write(f"{s:.10g}," + ",".join(f"{v:.17g}" for v in row) + "\n")


def spectrum_sweep(sched: Schedule, diag: ProblemDiagonal, grid=None, m: int = 15) -> SpectrumTable:
    """lowest_eigenvalues over an s grid (default: 100 equal steps over [0, 1])."""
    if grid is None:
        grid = np.linspace(0.0, 1.0, 100)
    grid = np.atleast_1d(np.asarray(grid, dtype=np.float64))
    if grid.size == 0 or grid.min() < 0.0 or grid.max() > 1.0:
        raise ValueError("grid must be non-empty within [0, 1]")
    levels = np.empty((grid.size, m))
    for i, s in enumerate(grid):
        try:
            levels[i] = lowest_eigenvalues(float(s), sched, diag, m)
        except SpectrumError as err:
            raise SpectrumError(f"at s = {s:.6g}: {err}") from err
    return SpectrumTable(grid, levels)


def min_gap(table: SpectrumTable, degeneracy_tol: float = 1e-7) -> tuple[float, float]:
    """Smallest distance between the ground level and the first level strictly
    above it (by more than degeneracy_tol), over the grid. Returns (s, gap) at
    the first grid point attaining the minimum."""
    if table.m < 2:
        raise ValueError("need at least two levels to measure a gap")
    best_s, best_gap = None, np.inf
    for s, row in zip(table.grid, table.levels):
        above = row[row > row[0] + degeneracy_tol]
        if above.size == 0:
            continue
        gap = float(above[0] - row[0])
        if gap < best_gap:
            best_s, best_gap = float(s), gap
    if best_s is None:
        raise SpectrumError(
            f"all {table.m} levels degenerate within {degeneracy_tol} at every grid point"
        )
    return best_s, best_gap
