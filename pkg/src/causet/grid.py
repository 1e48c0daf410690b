"""Lattice discretisation of a spacetime: nodes, cone samples and the step graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from . import _kernels
from ._frames import quad
from .adapted import AdaptedMetricField, wick_rotation
from .errors import ConfigError
from .spacetime import SpacetimeSpec, _base_fields, causal_test

__all__ = ["GridModel", "build_grid_model"]


@dataclass(frozen=True, eq=False)
class GridModel:
    """Discrete causal model on an ``nx x ny`` lattice.

    Node ``k`` sits at index ``(i, j)`` with ``k = i * ny + j`` and chart
    point ``(x0 + i * sx, y0 + j * sy)``.  The step graph holds every lattice
    offset within ``r_step`` that passes the causal test at its base node;
    offsets leaving a non-periodic chart are dropped and recorded in
    ``exits``.

    Attributes
    ----------
    g, T : ndarray
        Unwidened metric and orientation per node.
    field : AdaptedMetricField
        Adapted metric samples.
    step : scipy.sparse.csr_matrix
        Directed step graph weighted by h-length.
    lattice : scipy.sparse.csr_matrix
        Undirected 8-neighbour lattice weighted by h-length; used for
        h-distances.
    L_cap : float
        Default length horizon of reachability queries.
    """

    spec: SpacetimeSpec
    shape: tuple[int, int]
    steps: np.ndarray
    points: np.ndarray
    g: np.ndarray
    T: np.ndarray
    field: AdaptedMetricField
    r_step: float
    eta: float
    L_cap: float
    offsets: np.ndarray
    step: sparse.csr_matrix
    exits: np.ndarray
    lattice: sparse.csr_matrix
    order_ptr: np.ndarray
    order_nodes: np.ndarray
    order_cyclic: np.ndarray
    comp_pos: np.ndarray
    scc_labels: np.ndarray

    @property
    def n_nodes(self):
        return self.shape[0] * self.shape[1]

    @property
    def spacing(self):
        return float(self.steps.max())

    @property
    def alpha(self):
        return self.spec.alpha

    @property
    def h(self):
        return self.field.h

    def index(self, i, j):
        """Node index of lattice position ``(i, j)``."""
        return np.asarray(i) * self.shape[1] + np.asarray(j)

    def ij(self, k):
        return np.divmod(np.asarray(k), self.shape[1])

    def node_at(self, p):
        """Nearest node to the chart point ``p`` (periodic axes wrapped)."""
        p = np.asarray(p, dtype=float)
        idx = []
        for axis in range(2):
            lo, hi = self.spec.chart[axis]
            n = self.shape[axis]
            i = int(np.rint((p[axis] - lo) / self.steps[axis]))
            i = i % n if self.spec.periodic[axis] else min(max(i, 0), n - 1)
            idx.append(i)
        return int(self.index(*idx))

    def grid(self, values):
        """Reshape a per-node array to ``(nx, ny)``."""
        return np.asarray(values).reshape(self.shape)

    def coordinate(self, axis):
        return self.points[:, axis]


def segment_lengths(spec, starts, v, max_segment):
    """h-length of the segments ``starts -> starts + v`` by midpoint quadrature."""
    m = max(1, int(np.ceil(np.hypot(*v) / max_segment - 1e-12)))
    d = np.asarray(v, dtype=float) / m
    field = AdaptedMetricField(spec, starts, None)
    total = np.zeros(len(starts))
    for k in range(m):
        mid = starts + (k + 0.5) * d
        total += np.sqrt(quad(field.at(mid), d))
    return total


def _shift(spec, shape, di, dj):
    """Target index of every node under the lattice offset ``(di, dj)``.

    Returns ``(target, valid)``; invalid entries leave a non-periodic chart.
    """
    nx, ny = shape
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    I, J = I.ravel() + di, J.ravel() + dj
    valid = np.ones(I.shape, bool)
    if spec.periodic[0]:
        I %= nx
    else:
        valid &= (I >= 0) & (I < nx)
    if spec.periodic[1]:
        J %= ny
    else:
        valid &= (J >= 0) & (J < ny)
    return I * ny + J, valid


def _resolution(resolution):
    if np.isscalar(resolution):
        shape = (int(resolution), int(resolution))
    else:
        shape = tuple(int(r) for r in resolution)
    if len(shape) != 2 or min(shape) < 8:
        raise ConfigError(f"resolution must be >= 8 per axis, got {resolution!r}")
    return shape


def build_grid_model(spec, resolution, r_step=None, eta=None, L_cap=3.0):
    """Discretise ``spec`` on a regular lattice.

    Parameters
    ----------
    spec : SpacetimeSpec
    resolution : int or (int, int)
        Nodes per axis (at least 8).
    r_step : float, optional
        Step radius in chart units; defaults to 2.5 lattice spacings.
    eta : float, optional
        Causal slack; defaults to ``0.25 * spacing / r_step``.
    L_cap : float
        Default horizon for reachability.

    Returns
    -------
    GridModel
    """
    shape = _resolution(resolution)
    extent = spec.extent
    if not np.all(extent > 0):
        raise ConfigError("degenerate chart")
    steps = extent / np.array(shape)
    spacing = float(steps.max())
    r_step = 2.5 * spacing if r_step is None else float(r_step)
    if r_step < spacing * (1 - 1e-12):
        raise ConfigError(f"r_step must be >= grid spacing {spacing!r}")
    eta = 0.25 * spacing / r_step if eta is None else float(eta)
    if eta < 0:
        raise ConfigError("eta must be >= 0")
    if not L_cap > 0:
        raise ConfigError("L_cap must be positive")

    nx, ny = shape
    (x0, _), (y0, _) = spec.chart
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    points = np.stack([x0 + I.ravel() * steps[0], y0 + J.ravel() * steps[1]], axis=1)
    g, T = _base_fields(spec, points)
    field = wick_rotation(spec, points)
    N = nx * ny

    # step graph
    ri = int(np.floor(r_step / steps[0] + 1e-9))
    rj = int(np.floor(r_step / steps[1] + 1e-9))
    offsets, rows, cols, wts = [], [], [], []
    exits = np.zeros(N, bool)
    for di in range(-ri, ri + 1):
        for dj in range(-rj, rj + 1):
            v = np.array([di * steps[0], dj * steps[1]])
            if (di == 0 and dj == 0) or np.hypot(*v) > r_step * (1 + 1e-9):
                continue
            ok = causal_test(g, T, spec.alpha, v, eta)
            if not ok.any():
                continue
            offsets.append((di, dj))
            target, valid = _shift(spec, shape, di, dj)
            exits |= ok & ~valid
            src = np.flatnonzero(ok & valid)
            rows.append(src)
            cols.append(target[src])
            wts.append(segment_lengths(spec, points[src], v, spacing))
    rows = np.concatenate(rows) if rows else np.zeros(0, np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, np.int64)
    wts = np.concatenate(wts) if wts else np.zeros(0)
    step = sparse.csr_matrix((wts, (rows, cols)), shape=(N, N))
    step.sort_indices()

    # undirected 8-neighbour lattice for h-distances
    lr, lc, lw = [], [], []
    for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
        target, valid = _shift(spec, shape, di, dj)
        src = np.flatnonzero(valid)
        v = np.array([di * steps[0], dj * steps[1]])
        w = segment_lengths(spec, points[src], v, spacing)
        lr += [src, target[src]]
        lc += [target[src], src]
        lw += [w, w]
    lattice = sparse.csr_matrix(
        (np.concatenate(lw), (np.concatenate(lr), np.concatenate(lc))), shape=(N, N)
    )

    ncomp, labels = connected_components(step, directed=True, connection="strong")
    indptr = step.indptr.astype(np.int64)
    indices = step.indices.astype(np.int64)
    order_ptr, order_nodes, order_cyclic = _kernels.topo_components(
        indptr, indices, labels.astype(np.int64), ncomp
    )
    comp_pos = np.empty(N, np.int64)
    comp_pos[order_nodes] = np.repeat(np.arange(ncomp), np.diff(order_ptr))

    return GridModel(
        spec=spec,
        shape=shape,
        steps=steps,
        points=points,
        g=g,
        T=T,
        field=field,
        r_step=r_step,
        eta=eta,
        L_cap=float(L_cap),
        offsets=np.array(offsets, dtype=np.int64).reshape(-1, 2),
        step=step,
        exits=exits,
        lattice=lattice,
        order_ptr=order_ptr,
        order_nodes=order_nodes,
        order_cyclic=order_cyclic,
        comp_pos=comp_pos,
        scc_labels=labels,
    )
