"""Pre-attractors, attractors and basins of attraction.

Closure is the one-cell dilation of :func:`causet.reach.closure_mask`, so
every inclusion test here errs by one cell toward the strict inclusion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .chains import chain_recurrent_set, chain_reachable_from
from .grid import build_grid_model
from .reach import RTOL, _as_sources, _csr, closure_mask, reach_set, shortest_from
from .spacetime import widen_cones

__all__ = [
    "AttractorRecord",
    "PreAttractorCertificate",
    "attractor_of",
    "basin",
    "basin_depth",
    "candidates_from_chains",
    "candidates_from_widened_futures",
    "is_pre_attractor",
]


@dataclass(frozen=True, eq=False)
class PreAttractorCertificate:
    """Outcome of the test ``closure(J+_{t0}(U)) <= U``.

    ``status`` is ``"holds"``, ``"fails"`` or ``"inconclusive"``; the last
    one means every violating node lies within one cell of a reached node
    whose causal steps leave the chart, so the violation may be an artefact
    of the truncated chart.  ``holds`` is true only for ``"holds"``.
    """

    holds: bool
    status: str
    violations: np.ndarray
    boundary_exit: bool
    image: np.ndarray

    def __bool__(self):
        return self.holds


@dataclass(frozen=True, eq=False)
class AttractorRecord:
    """Pre-attractor ``U`` with its attractor ``A`` and basin ``B``.

    ``undecided`` marks basin nodes whose future touches the bad region
    through a chart-leaving step; they are kept in ``B`` (curves leaving the
    chart end there) but excluded from strictness claims.
    """

    U: np.ndarray
    t0: float
    A: np.ndarray
    B: np.ndarray
    undecided: np.ndarray
    boundary_contaminated: bool
    converged: bool
    iterations: int
    t_max: float
    source: str = ""
    flags: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "t0": self.t0,
            "t_max": self.t_max,
            "source": self.source,
            "U": rle_encode(self.U),
            "A": rle_encode(self.A),
            "B": rle_encode(self.B),
            "undecided": rle_encode(self.undecided),
            "boundary_contaminated": self.boundary_contaminated,
            "converged": self.converged,
            "iterations": self.iterations,
            "sizes": {"U": int(self.U.sum()), "A": int(self.A.sum()), "B": int(self.B.sum())},
            "flags": dict(self.flags),
        }


def rle_encode(mask):
    """Run lengths of a boolean mask, starting with a (possibly empty) run of ``False``."""
    m = np.asarray(mask, bool)
    if m.size == 0:
        return []
    bounds = np.concatenate([[0], np.flatnonzero(m[1:] != m[:-1]) + 1, [m.size]])
    runs = np.diff(bounds).tolist()
    return [0] + runs if m[0] else runs


def rle_decode(runs, n):
    out = np.zeros(n, bool)
    pos, val = 0, False
    for r in runs:
        out[pos:pos + r] = val
        pos += r
        val = not val
    if pos != n:
        raise ValueError("run lengths do not match mask size")
    return out


def is_pre_attractor(model, U, t0):
    """Test ``closure(J+_{t0}(U)) <= U`` on the model horizon."""
    U = np.asarray(U, bool)
    if not U.any():
        raise ValueError("U must be non-empty")
    if not 0 < t0 < model.L_cap:
        raise ValueError("t0 must lie in (0, L_cap)")
    fut, exit_nodes = reach_set(model, U, t0, with_exit=True)
    image = closure_mask(model, fut)
    viol = image & ~U
    contaminated = bool(exit_nodes.any())
    if not viol.any():
        status = "holds"
    elif contaminated and not np.any(viol & ~closure_mask(model, exit_nodes)):
        status = "inconclusive"
    else:
        status = "fails"
    return PreAttractorCertificate(status == "holds", status, np.flatnonzero(viol), contaminated, image)


def basin_depth(model, U):
    """Per node, the longest capped walk length into ``closure(~U)``.

    Returns ``(m, exit_bad)``: ``m[p] = -1`` when ``p`` reaches no node of
    the dilated complement, and ``exit_bad`` marks futures touching such a
    node with a chart-leaving step.  ``m`` never increases along a step.
    """
    bad = closure_mask(model, ~np.asarray(U, bool))
    return _kernels.basin_scan(
        *_csr(model), model.order_ptr, model.order_nodes, model.order_cyclic,
        model.comp_pos, float(model.L_cap), bad, model.exits,
    )


def basin(model, record, t_max=None):
    """Basin of ``U``-attraction and the boundary-undecided nodes.

    ``p`` is in the basin iff some ``t <= t_max`` has
    ``closure(J+_t(p)) <= U``, i.e. iff every reached node of the one-cell
    dilation of the complement of ``U`` is reached only by walks shorter than
    ``t_max``.  One longest-walk sweep per node suffices.

    Returns ``(B, undecided)``.
    """
    t_max = model.L_cap if t_max is None else float(t_max)
    U = np.asarray(record.U if hasattr(record, "U") else record, bool)
    m, exit_bad = basin_depth(model, U)
    B = m < t_max - RTOL * max(1.0, t_max)
    return B, B & exit_bad


def attractor_of(model, U, t0, max_iters=200, t_max=None, source=""):
    """Attractor of the pre-attractor ``U``: iterate ``A <- closure(J+_{t0}(A))``.

    The iterates decrease (``U`` is a pre-attractor and reachability is
    monotone), so the loop stops at a fixed point; an empty attractor is a
    valid outcome.  Raises ``ValueError`` when ``U`` fails the certificate.
    """
    U = np.asarray(U, bool)
    cert = is_pre_attractor(model, U, t0)
    if cert.status == "fails":
        raise ValueError(f"U is not a pre-attractor ({cert.violations.size} violating nodes)")
    contaminated = cert.boundary_exit
    A = U.copy()
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        if not A.any():
            converged = True
            break
        fut, exit_nodes = reach_set(model, A, t0, with_exit=True)
        contaminated |= bool(exit_nodes.any())
        nxt = closure_mask(model, fut)
        if np.array_equal(nxt, A):
            converged = True
            break
        A = nxt
    t_max = model.L_cap if t_max is None else float(t_max)
    B, undecided = basin(model, U, t_max)
    return AttractorRecord(
        U=U, t0=float(t0), A=A, B=B, undecided=undecided,
        boundary_contaminated=bool(contaminated), converged=converged,
        iterations=it, t_max=t_max, source=source,
        flags={"certificate": cert.status},
    )


def candidates_from_chains(model, graph, x, report=None):
    """Chain-forward set of ``x`` as a pre-attractor candidate with ``t0 = T``.

    Returns ``[(U, t0)]`` when the certificate holds, otherwise ``[]``; a
    chain recurrent ``x`` yields ``[]``.
    """
    report = chain_recurrent_set(graph) if report is None else report
    if report.mask[x]:
        return []
    U = chain_reachable_from(graph, x)
    if not U.any() or U[x]:
        return []
    t0 = graph.T
    if not is_pre_attractor(model, U, t0).holds:
        return []
    return [(U, t0)]


def _gap_radius(alpha):
    """Shortest integer vector ``(a, b)`` with ``1 < b / a < sqrt(1 + alpha)``."""
    slope = np.sqrt(1.0 + alpha)
    best = np.inf
    for a in range(1, 200):
        b = int(np.ceil(a * slope) - 1)
        if b > a:
            best = min(best, np.hypot(a, b))
        if a > best:
            break
    return best


def widened_model(model, alpha, r_step=None):
    """The model rebuilt on the ``alpha``-widened spacetime.

    The default step radius is large enough for the lattice to carry a
    direction strictly between the original and the widened null slopes
    (measured in lattice units); with the original radius a small widening
    would add no step at all.
    """
    if r_step is None:
        r_step = max(model.r_step, 1.05 * model.spacing * _gap_radius(alpha))
    return build_grid_model(
        widen_cones(model.spec, alpha), model.shape, r_step=r_step, L_cap=model.L_cap,
    )


def _open_future(wide, z):
    """Nodes reached from ``z`` by at least one widened step."""
    succ = wide.step.indices[wide.step.indptr[z]:wide.step.indptr[z + 1]]
    if succ.size == 0:
        return np.zeros(wide.n_nodes, bool)
    return np.isfinite(shortest_from(wide, _as_sources(wide, succ)))


def candidates_from_widened_futures(model, alpha, x, t0=1.0, depths=None, wide=None):
    """Widened chronological futures of ``x`` and of points in its past.

    For each ``z`` in ``{x}`` together with past points of ``x`` at the
    h-distances ``depths`` (along the step graph), ``U`` is the one-cell
    dilation of the open future of ``z`` in the ``alpha``-widened model.
    Candidates are kept when ``U`` is a pre-attractor of the original
    model with parameter ``t0``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    wide = widened_model(model, alpha) if wide is None else wide
    depths = (0.25, 0.5) if depths is None else depths
    past = shortest_from(_Reversed(model), np.array([x], np.int64))
    seeds = [x]
    for d in depths:
        ok = np.isfinite(past) & (past > 0)
        if ok.any():
            cand = np.flatnonzero(ok)
            z = int(cand[np.argmin(np.abs(past[cand] - d))])
            if z not in seeds:
                seeds.append(z)
    out = []
    for z in seeds:
        U = closure_mask(model, _open_future(wide, z))
        if U.any() and is_pre_attractor(model, U, t0).holds:
            out.append((U, float(t0)))
    return out


class _Reversed:
    """Minimal view of a model with its step graph transposed."""

    def __init__(self, model):
        self.step = model.step.T.tocsr()
        self.step.sort_indices()
        self.n_nodes = model.n_nodes
