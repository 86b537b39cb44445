"""Random MaxCut instances and their diagonal cost Hamiltonians.

Basis-state convention used throughout the package: bit ``i`` of the
basis index ``z`` carries the spin of vertex ``i``, with bit value 0
meaning spin +1 and bit value 1 meaning spin -1.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .exceptions import (
    CapacityError,
    DegreeParityError,
    InfeasibleError,
    ParseError,
)

#: Largest qubit count accepted by :func:`build_cost_diagonal` by default.
MAX_QUBITS = 24

Edge = Tuple[int, int, float]


class Ensemble(str, enum.Enum):
    REGULAR3_UNWEIGHTED = "Regular3Unweighted"
    REGULAR3_WEIGHTED = "Regular3Weighted"
    ERDOS_RENYI = "ErdosRenyi"

    @classmethod
    def parse(cls, value) -> "Ensemble":
        """Accept the enum itself, its value, or a short CLI alias."""
        if isinstance(value, cls):
            return value
        aliases = {"reg3": cls.REGULAR3_UNWEIGHTED, "reg3w": cls.REGULAR3_WEIGHTED, "er": cls.ERDOS_RENYI}
        if value in aliases:
            return aliases[value]
        return cls(value)

    @property
    def weighted(self) -> bool:
        return self is Ensemble.REGULAR3_WEIGHTED

    @property
    def regular(self) -> bool:
        return self is not Ensemble.ERDOS_RENYI


@dataclass(frozen=True)
class Graph:
    """Weighted simple graph on vertices ``0..n-1``.

    Edges are stored as ``(u, v, w)`` with ``u < v``. Construction checks
    every invariant of the declared ensemble and raises
    :class:`~tqa_qaoa.exceptions.InfeasibleError` on violation.
    """

    n: int
    edges: Tuple[Edge, ...]
    ensemble: Ensemble = Ensemble.ERDOS_RENYI

    def __post_init__(self):
        object.__setattr__(self, "ensemble", Ensemble.parse(self.ensemble))
        edges = tuple((int(u), int(v), float(w)) for u, v, w in self.edges)
        object.__setattr__(self, "edges", edges)
        problem = _check_invariants(self.n, edges, self.ensemble)
        if problem is not None:
            raise InfeasibleError(problem)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def weighted(self) -> bool:
        return self.ensemble.weighted

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges], dtype=float)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for u, v, w in self.edges:
            a[u, v] = a[v, u] = w
        return a


def _check_invariants(n: int, edges: Sequence[Edge], ensemble: Ensemble) -> Optional[str]:
    if n < 1:
        return f"vertex count must be positive, got {n}"
    seen = set()
    for u, v, w in edges:
        if not 0 <= u < v < n:
            return f"edge ({u}, {v}) violates 0 <= u < v < n={n}"
        if (u, v) in seen:
            return f"duplicate edge ({u}, {v})"
        seen.add((u, v))
        if not math.isfinite(w):
            return f"non-finite weight on edge ({u}, {v})"
        if ensemble.weighted:
            if not 0.0 <= w < 1.0:
                return f"weight {w!r} on edge ({u}, {v}) outside [0, 1)"
        elif w != 1.0:
            return f"unweighted ensemble requires w = 1, edge ({u}, {v}) has {w!r}"
    if ensemble.regular:
        deg = np.zeros(n, dtype=int)
        for u, v, _ in edges:
            deg[u] += 1
            deg[v] += 1
        if np.any(deg != 3):
            return "3-regular ensemble requires every vertex to have degree 3"
    return None


def _as_rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def generate_regular3(n: int, weighted: bool = False, seed=None, max_retries: int = 1000) -> Graph:
    """Sample a random 3-regular graph with the configuration model.

    All ``3n`` half-edges are paired uniformly at random; any pairing that
    produces a self-loop or a repeated edge is discarded and redrawn.

    Parameters
    ----------
    n : int
        Number of vertices, at least 4 and even.
    weighted : bool
        Draw edge weights uniformly from ``[0, 1)`` instead of using 1.
    seed : int, array-like or numpy Generator, optional
        Source of randomness. Identical seeds give identical graphs.
    max_retries : int
        Number of rejected pairings tolerated before giving up.

    Returns
    -------
    Graph
    """
    if (3 * n) % 2:
        raise DegreeParityError(f"no 3-regular graph on n={n} vertices: degree sum 3n={3 * n} is odd")
    if n < 4:
        raise InfeasibleError(f"3-regular graphs need n >= 4, got n={n}")
    rng = _as_rng(seed)
    stubs = np.repeat(np.arange(n), 3)
    for _ in range(max_retries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        pairs.sort(axis=1)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        keys = pairs[:, 0] * n + pairs[:, 1]
        if np.unique(keys).size != keys.size:
            continue
        order = np.argsort(keys)
        pairs = pairs[order]
        if weighted:
            weights = rng.random(len(pairs))
        else:
            weights = np.ones(len(pairs))
        edges = tuple((int(u), int(v), float(w)) for (u, v), w in zip(pairs, weights))
        ensemble = Ensemble.REGULAR3_WEIGHTED if weighted else Ensemble.REGULAR3_UNWEIGHTED
        return Graph(n, edges, ensemble)
    raise InfeasibleError(f"configuration model failed to produce a simple graph in {max_retries} attempts")


def generate_erdos_renyi(n: int, q: float = 0.5, seed=None) -> Graph:
    """Include each of the ``n(n-1)/2`` vertex pairs independently with probability ``q``."""
    if n < 2:
        raise InfeasibleError(f"Erdos-Renyi graphs need n >= 2, got n={n}")
    if not 0.0 < q <= 1.0:
        raise InfeasibleError(f"edge probability must lie in (0, 1], got q={q}")
    rng = _as_rng(seed)
    pairs = list(combinations(range(n), 2))
    keep = rng.random(len(pairs)) < q
    edges = tuple((u, v, 1.0) for (u, v), k in zip(pairs, keep) if k)
    return Graph(n, edges, Ensemble.ERDOS_RENYI)


def generate_graph(ensemble, n: int, seed=None, q: float = 0.5) -> Graph:
    ensemble = Ensemble.parse(ensemble)
    if ensemble is Ensemble.ERDOS_RENYI:
        return generate_erdos_renyi(n, q, seed)
    return generate_regular3(n, weighted=ensemble.weighted, seed=seed)


@dataclass(frozen=True, eq=False)
class CostDiagonal:
    """Diagonal of the MaxCut Hamiltonian ``sum_e w_e Z_u Z_v`` in the computational basis."""

    n: int
    values: np.ndarray = field(repr=False)
    c_min: float
    argmin_states: np.ndarray = field(repr=False)
    frobenius: float
    integer_spectrum: bool = False
    #: distinct eigenvalues and, per basis state, the position of its eigenvalue
    levels: np.ndarray = field(default=None, repr=False)
    level_index: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.levels is None:
            levels, index = np.unique(self.values, return_inverse=True)
            object.__setattr__(self, "levels", levels)
            object.__setattr__(self, "level_index", index.astype(np.int32))

    def __len__(self):
        return self.values.shape[0]


def build_cost_diagonal(g: Graph, max_qubits: int = MAX_QUBITS) -> CostDiagonal:
    if g.n > max_qubits:
        raise CapacityError(f"2^{g.n} amplitudes exceed the configured budget of {max_qubits} qubits")
    idx = np.arange(1 << g.n, dtype=np.int64)
    values = np.zeros(idx.shape[0])
    for u, v, w in g.edges:
        parity = ((idx >> u) ^ (idx >> v)) & 1
        values += w * (1 - 2 * parity)
    values.setflags(write=False)
    c_min = float(values.min())
    argmin = np.flatnonzero(values == c_min)
    argmin.setflags(write=False)
    frob = float(np.sqrt(np.dot(values, values)))
    return CostDiagonal(
        n=g.n,
        values=values,
        c_min=c_min,
        argmin_states=argmin,
        frobenius=frob,
        integer_spectrum=not g.weighted,
    )


def s_metric(d: CostDiagonal) -> float:
    """Norm scaling ``n * 2**(n/2) / ||H_C||_F`` of a cost Hamiltonian."""
    if d.frobenius == 0.0:
        raise InfeasibleError("s_N undefined for an empty graph (zero Frobenius norm)")
    return d.n * 2.0 ** (d.n / 2) / d.frobenius


def bits_to_spins(index: int, n: int) -> np.ndarray:
    return 1 - 2 * ((index >> np.arange(n)) & 1)


# -- persistence -----------------------------------------------------------


def _format_weight(w: float) -> str:
    return format(w, "#.17g")


def format_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m} {g.ensemble.value}"]
    lines += [f"{u} {v} {_format_weight(w)}" for u, v, w in g.edges]
    return "\n".join(lines) + "\n"


def save_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_graph(g))


def parse_graph(lines: Iterable[str]) -> Graph:
    lines = [ln.rstrip("\r\n") for ln in lines]
    if not lines or not lines[0].strip():
        raise ParseError("missing header 'N M ENSEMBLE_TAG'", 1)
    head = lines[0].split()
    if len(head) != 3:
        raise ParseError(f"header must have 3 fields, got {len(head)}", 1)
    try:
        n, m = int(head[0]), int(head[1])
        ensemble = Ensemble(head[2])
    except ValueError as exc:
        raise ParseError(f"bad header: {exc}", 1) from None
    if n < 1 or m < 0:
        raise ParseError("N must be positive and M non-negative", 1)
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != m:
        raise ParseError(f"header declares {m} edges, found {len(body)}", len(lines))
    edges = []
    seen = set()
    for offset, line in enumerate(body, start=2):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected 'u v w', got {line!r}", offset)
        try:
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", offset) from None
        if not 0 <= u < v < n:
            raise ParseError(f"edge ({u}, {v}) violates 0 <= u < v < {n}", offset)
        if (u, v) in seen:
            raise ParseError(f"duplicate edge ({u}, {v})", offset)
        seen.add((u, v))
        if ensemble.weighted and not 0.0 <= w < 1.0:
            raise ParseError(f"weight {w!r} outside [0, 1) for {ensemble.value}", offset)
        if not ensemble.weighted and w != 1.0:
            raise ParseError(f"weight {w!r} must be 1 for {ensemble.value}", offset)
        edges.append((u, v, w))
    try:
        return Graph(n, tuple(edges), ensemble)
    except ValueError as exc:
        raise ParseError(str(exc), 1) from None


def load_graph(path) -> Graph:
    with open(os.fspath(path), encoding="utf-8") as fh:
        return parse_graph(fh.readlines())
