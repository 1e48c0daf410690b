"""Length-bounded causal reachability on the step graph.

For a source set ``S`` every node ``q`` carries the interval
``[lmin(q), lmax(q)]`` of h-lengths of discrete causal walks ``S -> q``,
both ends truncated at the horizon ``L_cap``.  ``lmax`` is the exact capped
supremum over walks: strongly connected pieces of the step graph that carry a
cycle saturate at ``L_cap`` and the rest of the graph is swept in
topological order of its condensation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .adapted import h_distance_from

__all__ = [
    "ReachResult",
    "closure_mask",
    "continuity_probe",
    "hausdorff",
    "reach_interval",
    "reach_set",
]

RTOL = 1e-9


def _as_sources(model, source):
    s = np.asarray(source)
    if s.dtype == bool:
        if s.shape != (model.n_nodes,):
            raise ValueError("mask does not match the model")
        return np.flatnonzero(s).astype(np.int64)
    s = np.atleast_1d(s).astype(np.int64)
    if s.size and (s.min() < 0 or s.max() >= model.n_nodes):
        raise IndexError("source node out of range")
    return np.unique(s)


def _csr(model):
    st = model.step
    return st.indptr.astype(np.int64), st.indices.astype(np.int64), st.data.astype(float)


def longest_from(model, sources, L_cap):
    """Capped longest-walk lengths from ``sources`` (``-1`` if unreached)."""
    indptr, indices, weights = _csr(model)
    return _kernels.longest_sweep(
        indptr, indices, weights, model.order_ptr, model.order_nodes,
        model.order_cyclic, model.comp_pos, sources, float(L_cap),
    )


def shortest_from(model, sources):
    indptr, indices, weights = _csr(model)
    return _kernels.dijkstra_min(indptr, indices, weights, sources)


@dataclass(frozen=True, eq=False)
class ReachResult:
    """Attainable-length intervals from a source set.

    Unreached nodes carry the empty interval ``[inf, -inf]``.
    """

    sources: np.ndarray
    lmin: np.ndarray
    lmax: np.ndarray
    L_cap: float
    exits: np.ndarray

    @property
    def reached(self):
        return np.isfinite(self.lmin)

    @property
    def boundary_exit(self):
        """Reached nodes from which a causal step leaves the chart."""
        return self.reached & self.exits

    @property
    def boundary_contaminated(self):
        return bool(self.boundary_exit.any())

    def mask(self, t, T=None):
        """Nodes of ``J+_{t,T}``: the interval meets ``[t, T]`` (``T`` defaults to the cap)."""
        T = self.L_cap if T is None else T
        if not 0 <= t <= T:
            raise ValueError("need 0 <= t <= T")
        tol = RTOL * max(1.0, self.L_cap)
        return self.reached & (self.lmin <= T + tol) & (self.lmax >= t - tol)


def reach_interval(model, source, L_cap=None):
    """Per-node attainable-length interval from ``source`` (node, indices or mask)."""
    L = model.L_cap if L_cap is None else float(L_cap)
    if not L > 0:
        raise ValueError("L_cap must be positive")
    sources = _as_sources(model, source)
    lmin = np.minimum(shortest_from(model, sources), L)
    lmax = longest_from(model, sources, L)
    lmin[lmax < 0] = np.inf
    lmax = np.where(lmax < 0, -np.inf, lmax)
    return ReachResult(sources, lmin, lmax, L, model.exits)


def reach_set(model, source_mask, t, T=None, L_cap=None, with_exit=False):
    """Union over sources of ``J+_{t,T}``.

    With ``T`` equal to the horizon a single multi-source sweep is exact,
    since ``J+_{t}`` from a set is ``{max over sources of lmax >= t}``;
    otherwise the per-source results are merged.  With ``with_exit`` the
    return value is ``(mask, exit_mask)`` where ``exit_mask`` marks reached
    nodes with a step leaving the chart.
    """
    L = model.L_cap if L_cap is None else float(L_cap)
    T = L if T is None else float(T)
    if not (0 <= t < T <= L * (1 + RTOL)):
        raise ValueError("need 0 <= t < T <= L_cap")
    sources = _as_sources(model, source_mask)
    N = model.n_nodes
    out = np.zeros(N, bool)
    reached = np.zeros(N, bool)
    tol = RTOL * max(1.0, L)
    if sources.size == 0:
        pass
    elif T >= L - tol:
        lmax = longest_from(model, sources, L)
        reached = lmax >= 0
        out = lmax >= t - tol
    else:
        for s in sources:
            r = reach_interval(model, s, L)
            out |= r.mask(t, T)
            reached |= r.reached
    if with_exit:
        return out, reached & model.exits
    return out


def closure_mask(model, mask):
    """Dilate ``mask`` by one lattice cell (8-neighbourhood, periodic aware)."""
    m = np.asarray(mask, bool).reshape(model.shape)
    modes = ["wrap" if p else "constant" for p in model.spec.periodic]
    padded = m
    for axis in range(2):
        widths = [(0, 0), (0, 0)]
        widths[axis] = (1, 1)
        padded = np.pad(padded, widths, mode=modes[axis])
    nx, ny = model.shape
    out = np.zeros_like(m)
    for di in range(3):
        for dj in range(3):
            out |= padded[di:di + nx, dj:dj + ny]
    return out.ravel()


def hausdorff(model, mask1, mask2):
    """Hausdorff distance between two node sets under the lattice h-distance."""
    m1 = np.asarray(mask1, bool)
    m2 = np.asarray(mask2, bool)
    if not m1.any() or not m2.any():
        raise ValueError("Hausdorff distance needs non-empty masks")
    d1 = h_distance_from(model, m1)
    d2 = h_distance_from(model, m2)
    return float(max(d1[m2].max(), d2[m1].max()))


def continuity_probe(model, p, t, T, radius_list):
    """Empirical Hausdorff modulus of ``q -> closure(J+_{t,T}(q))`` around ``p``.

    Returns a list of ``(r, sup over q in B(p, r) of d_H)``.  A pair of empty
    futures counts as distance 0; an empty future against a non-empty one as
    ``inf``.
    """
    if not 0 < t < T <= model.L_cap * (1 + RTOL):
        raise ValueError("need 0 < t < T <= L_cap")
    radius_list = [float(r) for r in radius_list]
    d = h_distance_from(model, [p], limit=max(radius_list, default=0.0) * (1 + RTOL))
    base = closure_mask(model, reach_interval(model, p).mask(t, T))
    cache = {}

    def dist(q):
        if q not in cache:
            other = closure_mask(model, reach_interval(model, q).mask(t, T))
            if not base.any() or not other.any():
                cache[q] = 0.0 if base.any() == other.any() else np.inf
            else:
                cache[q] = hausdorff(model, base, other)
        return cache[q]

    table = []
    for r in radius_list:
        ball = np.flatnonzero(d <= r * (1 + RTOL))
        table.append((r, max((dist(int(q)) for q in ball if q != p), default=0.0)))
    return table
