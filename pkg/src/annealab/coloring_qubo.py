"""Graph-coloring QUBO construction, evaluation, decoding and Ising conversion.

A k-coloring of graph G is encoded one-hot: binary variable (v, c) means
vertex v takes color c, flattened to index v*k + c. The cost is

    E(x) = P * sum_v (1 - sum_c x_{v,c})^2 + P * sum_{(u,v) in E} sum_c x_{u,c} x_{v,c}

so E(x) = 0 exactly when every vertex has one color and no edge is
monochromatic (a feasibility QUBO). Expanding the one-hot square gives a
constant offset P per vertex, linear terms -P and pairwise +2P inside each
vertex block.

Bit order: variable i is character i of a bits string and bit i (little
endian) of a basis-state index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .graphs import Graph


def index_to_bits(idx: int, n: int) -> str:
    return "".join("1" if (idx >> i) & 1 else "0" for i in range(n))


def bits_to_index(bits) -> int:
    return sum(1 << i for i, b in enumerate(bits) if int(b))


def bits_to_array(bits) -> np.ndarray:
    return np.array([int(b) for b in bits], dtype=np.uint8)


@dataclass(frozen=True)
class Sample:
    """One sampled assignment with its QUBO energy and validity flag."""

    bits: str
    energy: float
    valid: bool

    def to_json(self) -> str:
        return json.dumps({"bits": self.bits, "energy": self.energy, "valid": self.valid})

    @classmethod
    def from_json(cls, text: str) -> "Sample":
        obj = json.loads(text)
        return cls(bits=obj["bits"], energy=obj["energy"], valid=obj["valid"])


@dataclass(frozen=True)
class QuboProblem:
    """Upper-triangular QUBO: E(x) = offset + sum_{i<=j} q[i,j] x_i x_j.

    Diagonal entries are the linear terms (x_i^2 = x_i). var_map carries the
    (vertex, color, index) layout when built from a coloring instance; source
    keeps the graph so bitstrings can be validated combinatorially.
    """

    n_vars: int
    q: tuple[tuple[int, int, float], ...] = ()
    offset: float = 0.0
    var_map: tuple[tuple[int, int, int], ...] = ()
    k: int = 0
    source: Graph | None = None

    def __post_init__(self):
        if self.n_vars < 1:
            raise ValueError(f"need at least one variable, got {self.n_vars}")
        seen = set()
        for i, j, _ in self.q:
            if not (0 <= i <= j < self.n_vars):
                raise ValueError(f"entry ({i}, {j}) must satisfy 0 <= i <= j < n_vars")
            if (i, j) in seen:
                raise ValueError(f"duplicate entry ({i}, {j})")
            seen.add((i, j))

    @cached_property
    def _linear(self) -> np.ndarray:
        lin = np.zeros(self.n_vars)
        for i, j, v in self.q:
            if i == j:
                lin[i] = v
        return lin

    @cached_property
    def _quad(self) -> tuple[tuple[int, int, float], ...]:
        return tuple((i, j, v) for i, j, v in self.q if i != j)

    def energy(self, bits) -> float:
        x = bits_to_array(bits) if isinstance(bits, str) else np.asarray(bits, dtype=np.float64)
        if x.shape != (self.n_vars,):
            raise ValueError(f"expected {self.n_vars} bits, got shape {x.shape}")
        e = self.offset + float(np.dot(self._linear, x))
        for i, j, v in self._quad:
            e += v * x[i] * x[j]
        return e

    def energies(self, batch: np.ndarray) -> np.ndarray:
        """Energies of a (m, n_vars) batch of 0/1 rows."""
        x = np.asarray(batch, dtype=np.float64)
        e = self.offset + x @ self._linear
        for i, j, v in self._quad:
            e = e + v * x[:, i] * x[:, j]
        return e

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_vars": self.n_vars,
                "offset": self.offset,
                "entries": [[i, j, v] for i, j, v in self.q],
                "var_map": [list(t) for t in self.var_map],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "QuboProblem":
        obj = json.loads(text)
        table: dict[tuple[int, int], float] = {}
        for i, j, v in obj["entries"]:
            a, b = min(i, j), max(i, j)
            table[(a, b)] = table.get((a, b), 0.0) + v
        var_map = tuple(tuple(t) for t in obj.get("var_map", []))
        k = 1 + max((c for _, c, _ in var_map), default=-1)
        return cls(
            n_vars=obj["n_vars"],
            q=tuple((i, j, v) for (i, j), v in sorted(table.items())),
            offset=obj["offset"],
            var_map=var_map,
            k=k,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "QuboProblem":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class IsingProblem:
    """Spin model: E(s) = offset + sum_i h[i] s_i + sum_{i<j} j_table s_i s_j, s_i in {-1,+1}."""

    n_spins: int
    h: tuple[float, ...]
    j: tuple[tuple[int, int, float], ...]
    offset: float = 0.0

    def __post_init__(self):
        if len(self.h) != self.n_spins:
            raise ValueError("h length must equal n_spins")
        for i, jj, _ in self.j:
            if not (0 <= i < jj < self.n_spins):
                raise ValueError(f"coupling ({i}, {jj}) must satisfy 0 <= i < j < n_spins")

    def energy(self, spins) -> float:
        s = np.asarray(spins, dtype=np.float64)
        e = self.offset + float(np.dot(self.h, s))
        for i, jj, v in self.j:
            e += v * s[i] * s[jj]
        return e


@dataclass(frozen=True)
class OneHotViolation:
    """Marker for a bitstring whose one-hot block at `vertex` has != 1 bits set."""

    vertex: int
    bits_set: int


def build_coloring_qubo(g: Graph, k: int, penalty: float = 1.0) -> QuboProblem:
    """One-hot k-coloring QUBO for g. Minimum value is 0 iff g is k-colorable."""
    if k < 1:
        raise ValueError(f"need at least one color, got k={k}")
    if penalty <= 0:
        raise ValueError(f"penalty must be positive, got {penalty}")
    idx = lambda v, c: v * k + c
    table: dict[tuple[int, int], float] = {}
    for v in range(g.n_vertices):
        for c in range(k):
            table[(idx(v, c), idx(v, c))] = -penalty
            for c2 in range(c + 1, k):
                table[(idx(v, c), idx(v, c2))] = 2.0 * penalty
    for u, v in g.edges:
        for c in range(k):
            a, b = sorted((idx(u, c), idx(v, c)))
            table[(a, b)] = table.get((a, b), 0.0) + penalty
    return QuboProblem(
        n_vars=g.n_vertices * k,
        q=tuple((i, j, v) for (i, j), v in sorted(table.items())),
        offset=penalty * g.n_vertices,
        var_map=tuple((v, c, idx(v, c)) for v in range(g.n_vertices) for c in range(k)),
        k=k,
        source=g,
    )


def qubo_energy(q: QuboProblem, bits) -> float:
    return q.energy(bits)


def qubo_to_ising(q: QuboProblem) -> IsingProblem:
    """Convert under s_i = 1 - 2 x_i; energies agree configuration by configuration."""
    h = np.zeros(q.n_vars)
    offset = q.offset
    couplings: dict[tuple[int, int], float] = {}
    for i, j, v in q.q:
        if i == j:
            # v*x = v/2 - (v/2) s
            h[i] -= v / 2.0
            offset += v / 2.0
        else:
            # v*x_i*x_j = v/4 (1 - s_i - s_j + s_i s_j)
            couplings[(i, j)] = couplings.get((i, j), 0.0) + v / 4.0
            h[i] -= v / 4.0
            h[j] -= v / 4.0
            offset += v / 4.0
    return IsingProblem(
        n_spins=q.n_vars,
        h=tuple(h),
        j=tuple((i, j, v) for (i, j), v in sorted(couplings.items())),
        offset=offset,
    )


def decode(q: QuboProblem, bits):
    """Return {vertex: color} when every vertex block is exactly one-hot,
    otherwise a OneHotViolation naming the first offending vertex."""
    if not q.var_map:
        raise ValueError("QUBO has no variable map; not a coloring instance")
    x = bits_to_array(bits) if isinstance(bits, str) else np.asarray(bits)
    coloring: dict[int, int] = {}
    counts: dict[int, int] = {}
    for v, c, i in q.var_map:
        counts.setdefault(v, 0)
        if x[i]:
            counts[v] += 1
            coloring[v] = c
    for v in sorted(counts):
        if counts[v] != 1:
            return OneHotViolation(vertex=v, bits_set=counts[v])
    return coloring


def validate(q: QuboProblem, bits) -> bool:
    """True iff bits decode one-hot and no source edge is monochromatic.

    Falls back to the energy-zero shortcut (exact for this feasibility
    construction) when the QUBO was loaded without its source graph.
    """
    if q.source is None:
        return abs(q.energy(bits)) <= 1e-9
    coloring = decode(q, bits)
    if isinstance(coloring, OneHotViolation):
        return False
    return all(coloring[u] != coloring[v] for u, v in q.source.edges)


def all_bitstrings(n: int) -> np.ndarray:
    """(2^n, n) array of 0/1 rows; row r holds the little-endian bits of r."""
    if n > 24:
        raise ValueError(f"refusing to enumerate 2^{n} bitstrings")
    r = np.arange(1 << n, dtype=np.uint32)
    return ((r[:, None] >> np.arange(n, dtype=np.uint32)) & 1).astype(np.uint8)


def brute_force_solve(q: QuboProblem, chunk: int = 1 << 16) -> tuple[float, tuple[str, ...]]:
    """Exhaustive minimum and every argmin bitstring. Guarded at 24 variables."""
    if q.n_vars > 24:
        raise ValueError(f"brute force limited to 24 variables, got {q.n_vars}")
    best = np.inf
    argmins: list[int] = []
    total = 1 << q.n_vars
    bit_cols = np.arange(q.n_vars, dtype=np.uint32)
    for start in range(0, total, chunk):
        r = np.arange(start, min(start + chunk, total), dtype=np.uint32)
        x = ((r[:, None] >> bit_cols) & 1).astype(np.float64)
        e = q.energies(x)
        lo = float(e.min())
        if lo < best - 1e-12:
            best = lo
            argmins = []
        argmins.extend(int(i) for i in r[e <= best + 1e-12])
    return best, tuple(index_to_bits(i, q.n_vars) for i in sorted(argmins))
