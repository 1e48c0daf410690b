"""(eps, T)-chain digraphs and chain recurrence.

An edge ``x -> y`` means: some node ``a`` within ``eps(x)`` of ``x`` has a
discrete causal walk of h-length in ``[T, T_cap]`` to a node ``z`` with
``d(z, y) <= eps(y)``.  Paths in the digraph are chains whose jumps are
bounded by ``eps`` at both ends of every segment, so consecutive jumps
accumulate to at most ``2 eps``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components, dijkstra

from .adapted import h_distance_from
from .errors import ConfigError
from .reach import RTOL, reach_interval

__all__ = [
    "ChainGraph",
    "RecurrenceReport",
    "approx_R",
    "build_chain_graph",
    "chain_reachable_from",
    "chain_recurrent_set",
]


@dataclass(frozen=True, eq=False)
class ChainGraph:
    model: object
    eps: np.ndarray
    T: float
    T_cap: float
    adjacency: sparse.csr_matrix

    @property
    def n_edges(self):
        return int(self.adjacency.nnz)

    def edges(self):
        """Edge list as an ``(E, 2)`` array of node indices in row-major order."""
        a = self.adjacency.tocoo()
        order = np.lexsort((a.col, a.row))
        return np.stack([a.row[order], a.col[order]], axis=1)


@dataclass(frozen=True, eq=False)
class RecurrenceReport:
    """Chain recurrent nodes.

    ``mask`` is the recurrent set (intersection over ``stages`` for a
    schedule), ``labels`` the SCC id of every node in the last stage graph.
    """

    mask: np.ndarray
    labels: np.ndarray
    stages: list = field(default_factory=list)
    schedule: list = field(default_factory=list)


def _eps_table(model, eps):
    e = np.broadcast_to(np.asarray(eps, dtype=float), (model.n_nodes,)).copy()
    if np.any(e < model.spacing * (1 - 1e-12)):
        raise ConfigError(f"eps must be >= grid spacing {model.spacing!r}")
    return e


def ball_matrix(model, eps, chunk=512):
    """Sparse 0/1 matrix with ``M[x, a] = 1`` iff ``d(x, a) <= eps[x]``."""
    N = model.n_nodes
    limit = float(eps.max()) * (1 + RTOL)
    rows, cols = [], []
    for lo in range(0, N, chunk):
        idx = np.arange(lo, min(N, lo + chunk))
        d = dijkstra(model.lattice, directed=False, indices=idx, limit=limit)
        r, c = np.nonzero(d <= eps[idx, None] * (1 + RTOL))
        rows.append(idx[r])
        cols.append(c)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    return sparse.csr_matrix((np.ones(r.size, np.float32), (r, c)), shape=(N, N))


def window_matrix(model, T, T_cap):
    """Dense boolean ``W[a, z]``: ``z`` reachable from ``a`` with a length in ``[T, T_cap]``."""
    N = model.n_nodes
    W = np.zeros((N, N), bool)
    for a in range(N):
        W[a] = reach_interval(model, a).mask(T, T_cap)
    return W


def build_chain_graph(model, eps, T, T_cap=None, window=None):
    """Chain digraph for a constant or per-node ``eps`` and length window ``[T, T_cap]``.

    ``window`` may pass a precomputed :func:`window_matrix` for the same
    ``(T, T_cap)`` to share work across several ``eps``.
    """
    T_cap = 2.0 * T if T_cap is None else float(T_cap)
    if not 0 < T <= T_cap:
        raise ConfigError(f"need 0 < T <= T_cap, got T={T!r}, T_cap={T_cap!r}")
    if T_cap > model.L_cap * (1 + RTOL):
        raise ConfigError(f"T_cap={T_cap!r} exceeds the model horizon {model.L_cap!r}")
    e = _eps_table(model, eps)
    ball = ball_matrix(model, e)
    W = window_matrix(model, T, T_cap) if window is None else window
    left = ball @ W.astype(np.float32)  # x -> z via a jump then a segment
    adj = (ball @ left.T).T > 0  # then a jump at the end: d(z, y) <= eps[y]
    return ChainGraph(model, e, float(T), T_cap, sparse.csr_matrix(adj))


def chain_recurrent_set(graph):
    """Nodes on a directed cycle of the chain graph (self-loops included)."""
    adj = graph.adjacency
    _, labels = connected_components(adj, directed=True, connection="strong")
    sizes = np.bincount(labels)
    mask = (sizes[labels] >= 2) | (adj.diagonal() > 0)
    return RecurrenceReport(mask, labels, [mask], [(graph.eps, graph.T)])


def chain_reachable_from(graph, x):
    """Nodes ending a chain of at least one segment from ``x``, dilated by ``eps``."""
    adj = graph.adjacency
    reached = np.zeros(adj.shape[0], bool)
    frontier = np.unique(adj.indices[adj.indptr[x]:adj.indptr[x + 1]])
    while frontier.size:  # level-synchronous BFS
        reached[frontier] = True
        nbr = adj[frontier].indices
        frontier = np.unique(nbr[~reached[nbr]])
    if not reached.any():
        return reached
    d = h_distance_from(graph.model, reached, limit=float(graph.eps.max()) * (1 + RTOL))
    return d <= graph.eps * (1 + RTOL)


def approx_R(model, schedule):
    """Intersection of ``R_{eps,T}`` over a schedule with shrinking ``eps`` and growing ``T``."""
    schedule = [(eps, float(T)) for eps, T in schedule]
    if not schedule:
        raise ValueError("schedule must be non-empty")
    for (e0, t0), (e1, t1) in zip(schedule, schedule[1:]):
        if np.any(np.asarray(e1) > np.asarray(e0)) or t1 < t0:
            raise ValueError("schedule needs non-increasing eps and non-decreasing T")
    mask = np.ones(model.n_nodes, bool)
    stages = []
    cache = {}
    for eps, T in schedule:
        if T not in cache:
            cache = {T: window_matrix(model, T, 2.0 * T)}
        rep = chain_recurrent_set(build_chain_graph(model, eps, T, window=cache[T]))
        stages.append(rep.mask)
        mask &= rep.mask
    return RecurrenceReport(mask, rep.labels, stages, schedule)
