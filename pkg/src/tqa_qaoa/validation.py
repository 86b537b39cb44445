"""Input coercion for the estimator API."""
from __future__ import annotations

import numbers

import numpy as np

from .graphs import Ensemble, Graph
from .simulator import AngleSchedule


def check_graph(X) -> Graph:
    """Coerce ``X`` to a :class:`Graph`.

    Accepts a ``Graph`` (returned unchanged), a square symmetric weight
    matrix with zero diagonal, or an iterable of ``(u, v)`` / ``(u, v, w)``
    edges. Matrices and edge lists whose weights are all 1 become unweighted
    graphs (tagged 3-regular when every degree is 3); other weights must
    form a 3-regular graph with weights in ``[0, 1)``. Zero entries of a
    matrix are read as missing edges.
    """
    if isinstance(X, Graph):
        return X
    arr = np.asarray(X, dtype=float) if not _is_edge_list(X) else None
    if arr is not None and arr.ndim == 2 and arr.shape[0] == arr.shape[1] and arr.shape[0] > 0:
        if not np.all(np.isfinite(arr)):
            raise ValueError("weight matrix contains NaN or Inf")
        if not np.allclose(arr, arr.T, rtol=0, atol=0):
            raise ValueError("weight matrix must be symmetric")
        if np.any(np.diag(arr) != 0):
            raise ValueError("weight matrix must have a zero diagonal (no self-loops)")
        n = arr.shape[0]
        iu, ju = np.nonzero(np.triu(arr, 1))
        edges = [(int(u), int(v), float(arr[u, v])) for u, v in zip(iu, ju)]
    else:
        edges, n = _edges_from_list(X)
    return Graph(n, tuple(edges), _infer_ensemble(n, edges))


def _is_edge_list(X) -> bool:
    try:
        first = next(iter(X))
    except (TypeError, StopIteration):
        return False
    return isinstance(first, tuple)


def _edges_from_list(X):
    edges = []
    for item in X:
        if len(item) == 2:
            u, v, w = item[0], item[1], 1.0
        elif len(item) == 3:
            u, v, w = item
        else:
            raise ValueError(f"edges must be (u, v) or (u, v, w) tuples, got {item!r}")
        if not all(isinstance(t, numbers.Integral) for t in (u, v)):
            raise ValueError(f"vertex labels must be integers, got {item!r}")
        u, v = (u, v) if u < v else (v, u)
        edges.append((int(u), int(v), float(w)))
    if not edges:
        raise ValueError("edge list is empty")
    n = 1 + max(v for _, v, _ in edges)
    return sorted(edges), n


def _infer_ensemble(n, edges) -> Ensemble:
    deg = np.zeros(n, dtype=int)
    for u, v, _ in edges:
        deg[u] += 1
        deg[v] += 1
    regular = bool(np.all(deg == 3))
    if all(w == 1.0 for _, _, w in edges):
        return Ensemble.REGULAR3_UNWEIGHTED if regular else Ensemble.ERDOS_RENYI
    if not regular:
        raise ValueError("weighted graphs are supported only as 3-regular graphs with weights in [0, 1)")
    return Ensemble.REGULAR3_WEIGHTED


def check_angles(angles, p=None) -> AngleSchedule:
    """Coerce a schedule or a flat ``(gamma.., beta..)`` vector, optionally checking the depth."""
    if not isinstance(angles, AngleSchedule):
        angles = AngleSchedule.from_vector(np.asarray(angles, dtype=float).reshape(-1))
    if not np.all(np.isfinite(angles.to_vector())):
        raise ValueError("angles must be finite")
    if p is not None and angles.p != p:
        raise ValueError(f"expected depth p={p}, got {angles.p}")
    return angles


def check_depth(p) -> int:
    if isinstance(p, bool) or not isinstance(p, numbers.Integral) or p < 1:
        raise ValueError(f"p must be a positive integer, got {p!r}")
    return int(p)
