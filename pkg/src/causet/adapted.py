"""Adapted Riemannian metric (Wick rotation) and h-lengths/h-distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra

from ._frames import in_frame, orthonormal_frame, quad, wick_matrix
from .errors import ConstructionError, DomainError
from .spacetime import SpacetimeSpec, _base_fields, wrap_points

__all__ = [
    "AdaptedMetricField",
    "adapted_residuals",
    "check_adapted_at",
    "h_distance",
    "h_distance_from",
    "h_length",
    "wick_rotation",
]


@dataclass(frozen=True)
class AdaptedMetricField:
    """Wick rotation ``h`` of ``spec`` sampled at ``points``.

    The field can also be evaluated off the sample points with :meth:`at`,
    which is what the length quadrature uses.
    """

    spec: SpacetimeSpec
    points: np.ndarray
    h: np.ndarray

    def at(self, xy):
        xy = wrap_points(self.spec, xy)
        g, T = _base_fields(self.spec, xy)
        return wick_matrix(g, T)


def wick_rotation(spec, points):
    """Adapted metric of ``spec`` at ``points`` (shape ``(N, 2)``).

    The orientation of the *unwidened* metric is used, so widened specs share
    the adapted metric of their base spacetime.
    """
    points = wrap_points(spec, np.atleast_2d(points))
    g, T = _base_fields(spec, points)
    gTT = quad(g, T)
    bad = np.flatnonzero(~(gTT < 0))
    if bad.size:
        k = int(bad[0])
        raise ConstructionError(f"orientation not timelike at node {k} (point {points[k].tolist()})")
    return AdaptedMetricField(spec, points, wick_matrix(g, T))


def check_adapted_at(field, k, g=None, T=None):
    """Max-norm deviation from the adapted normal form at node ``k``.

    In the g-orthonormal frame ``(T/|T|, n)`` the pair ``(g, h)`` must read
    ``(diag(-1, 1), identity)``; the residual is the largest entry-wise
    deviation of either matrix.  ``g``/``T`` override those of ``field.spec``,
    which lets callers test a corrupted pair.
    """
    p = field.points[k]
    if g is None or T is None:
        g0, T0 = _base_fields(field.spec, p)
        g = g0 if g is None else np.asarray(g, dtype=float)
        T = T0 if T is None else np.asarray(T, dtype=float)
    E = orthonormal_frame(g, T)
    G = in_frame(g, E)
    H = in_frame(field.h[k], E)
    return float(max(np.abs(G - np.diag([-1.0, 1.0])).max(), np.abs(H - np.eye(2)).max()))


def h_length(field, curve, max_segment=None):
    """Riemannian length of a polyline by midpoint quadrature.

    Periodic coordinates may be given unwrapped; only the midpoints are
    wrapped for evaluation.  Segments longer than ``max_segment``
    (coordinate norm) are subdivided evenly.
    """
    curve = np.asarray(curve, dtype=float)
    if curve.ndim != 2 or curve.shape[0] < 2:
        raise ValueError("a curve needs at least two points")
    spec = field.spec
    for axis in range(2):
        if not spec.periodic[axis]:
            lo, hi = spec.chart[axis]
            tol = 1e-12 * (hi - lo)
            c = curve[:, axis]
            if np.any(c < lo - tol) or np.any(c > hi + tol):
                raise DomainError(f"curve leaves the chart on axis {axis}")
    a, b = curve[:-1], curve[1:]
    if max_segment is not None:
        pieces = np.maximum(1, np.ceil(np.linalg.norm(b - a, axis=1) / max_segment)).astype(int)
        if np.any(pieces > 1):
            rows = []
            for p, q, m in zip(a, b, pieces):
                s = np.linspace(0.0, 1.0, m + 1)[:, None]
                rows.append(p + s * (q - p))
            pts = np.vstack([rows[0]] + [r[1:] for r in rows[1:]])
            a, b = pts[:-1], pts[1:]
    d = b - a
    h = field.at(0.5 * (a + b))
    return float(np.sqrt(np.maximum(quad(h, d), 0.0)).sum())


def h_distance_from(model, sources, limit=np.inf):
    """Graph h-distance from the node set ``sources`` to every node.

    Accepts a boolean mask or an index array; returns ``inf`` beyond ``limit``
    and for an empty source set.
    """
    sources = np.asarray(sources)
    if sources.dtype == bool:
        sources = np.flatnonzero(sources)
    if sources.size == 0:
        return np.full(model.n_nodes, np.inf)
    return dijkstra(model.lattice, directed=False, indices=sources, min_only=True, limit=limit)


def h_distance(model, a, b):
    """Shortest h-length path between nodes ``a`` and ``b`` on the 8-neighbour lattice."""
    if a == b:
        return 0.0
    d = dijkstra(model.lattice, directed=False, indices=[a], limit=np.inf)
    return float(d[0, b])


def adapted_residuals(model):
    """:func:`check_adapted_at` for every node of ``model`` at once."""
    E = orthonormal_frame(model.g, model.T)
    G = in_frame(model.g, E)
    H = in_frame(model.field.h, E)
    rg = np.abs(G - np.diag([-1.0, 1.0])).reshape(len(G), -1).max(axis=1)
    rh = np.abs(H - np.eye(2)).reshape(len(H), -1).max(axis=1)
    return np.maximum(rg, rh)
