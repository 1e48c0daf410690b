"""Partial time functions built from attractor records.

For a record ``(U, A, B)``:

* ``f = mu / (mu + d(., complement of B))`` with ``mu = min(1, d(., A))``
  vanishes exactly on ``A`` and equals 1 exactly off ``B``;
* ``g_t(p)`` is the largest value of ``f`` over ``J+_t(p)``, which can only
  drop along future steps;
* ``tau_A = 1 - sum_k w_k g_{t_k}`` over a ladder of lengths, so ``tau_A``
  is 1 on ``A``, 0 off ``B`` and non-decreasing along future steps.

Records are combined with normalised ``2**-n`` weights.  The resulting
``tau`` is non-decreasing on every step edge and strictly increasing from
every node lying in ``B \\ A`` for some record.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .adapted import h_distance_from
from .attract import (
    attractor_of,
    basin_depth,
    candidates_from_chains,
    candidates_from_widened_futures,
    widened_model,
)
from .chains import build_chain_graph, chain_recurrent_set
from .grid import build_grid_model
from .reach import RTOL, _csr

__all__ = [
    "PipelineParams",
    "TimeField",
    "build_f",
    "combine",
    "default_ladder",
    "edge_monotonicity",
    "g_t_field",
    "global_time_function",
    "tau_A",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TimeField:
    """Per-node values in ``[0, 1]`` with a kind tag and provenance."""

    model: object
    values: np.ndarray
    kind: str
    provenance: dict = field(default_factory=dict)
    flags: np.ndarray | None = None

    def __post_init__(self):
        if self.values.shape != (self.model.n_nodes,):
            raise ValueError("values do not match the model")


def build_f(model, record):
    """Basin-to-attractor function of a record (``Psi = 1`` on the compact chart)."""
    A = np.asarray(record.A, bool)
    B = np.asarray(record.B, bool)
    if not B.any():
        raise ValueError("record has an empty basin")
    mu = np.minimum(1.0, h_distance_from(model, A)) if A.any() else np.ones(model.n_nodes)
    if B.all():
        f = mu / (mu + 1.0)
    else:
        dc = h_distance_from(model, ~B)
        f = mu / (mu + dc)
    return TimeField(model, f, "f", {"t0": record.t0, "source": record.source})


def _sweep_args(model):
    return (*_csr(model), model.order_ptr, model.order_nodes, model.order_cyclic,
            model.comp_pos, float(model.L_cap))


def _values(fields):
    return np.ascontiguousarray(np.stack([np.asarray(getattr(f, "values", f), float) for f in fields]))


def g_t_field(model, f, t, record=None):
    """``g_t(p) = max f over J+_{t, L_cap}(p)``; 0 where that set is empty.

    Nodes with an empty ``t``-future are flagged.  With ``record`` the
    field is pinned to 1 off its basin.
    """
    if not 0 < t <= model.L_cap * (1 + RTOL):
        raise ValueError("need 0 < t <= L_cap")
    tol = RTOL * max(1.0, model.L_cap)
    g, empty = _kernels.future_sup(*_sweep_args(model), _values([f]), np.array([float(t)]), tol)
    g = g[:, 0, 0]
    if record is not None:
        g = np.where(record.B, g, 1.0)
    return TimeField(model, g, "g_t", {"t": float(t)}, empty[:, 0])


def default_ladder(model):
    """Uniform ladder ``t_k = k * L_cap / 2**m``, ``k < 2**m``, with equal weights.

    ``m`` is the smallest exponent whose spacing is at most half the
    shortest step length, so every step crosses a rung.  The rung ``t = 0``
    stands in for all lengths below the lattice resolution.  Equal weights
    ``2**-m`` are exact binary fractions.
    """
    wmin = float(model.step.data.min()) if model.step.nnz else model.spacing
    m = max(1, int(np.ceil(np.log2(2.0 * model.L_cap / wmin))))
    K = 2 ** m
    return np.arange(K) * (model.L_cap / K), np.full(K, 1.0 / K)


def _check_ladder(t_list, weights):
    t = np.asarray(t_list, float)
    w = np.asarray(weights, float)
    if t.ndim != 1 or t.size == 0 or t.shape != w.shape:
        raise ValueError("t_list and weights must be non-empty and of equal length")
    if np.any(np.diff(t) <= 0) or t[0] < 0:
        raise ValueError("t_list must be increasing and non-negative")
    if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must be positive and sum to 1 (sum={w.sum()!r})")
    return t, w


def tau_A_many(model, records, fs, t_list=None, weights=None):
    """``tau_A`` for several records in one pass; returns ``(tau, n_empty)``."""
    if t_list is None:
        t_list, weights = default_ladder(model)
    t, w = _check_ladder(t_list, weights)
    tol = RTOL * max(1.0, model.L_cap)
    s, n_empty = _kernels.weighted_future_sup(*_sweep_args(model), _values(fs), t, tol, w)
    tau = np.clip(1.0 - s, 0.0, 1.0)
    for r, rec in enumerate(records):
        if rec is not None:
            tau[~rec.B, r] = 0.0  # g is pinned to 1 off the basin
    return tau, n_empty


def tau_A(model, f, t_list=None, weights=None, record=None):
    """``tau_A = sum_k w_k (1 - g_{t_k})`` evaluated as ``1 - sum_k w_k g_{t_k}``.

    Defaults to :func:`default_ladder`.  With ``record`` the value is pinned
    to 0 off the basin.
    """
    if t_list is None and weights is not None or t_list is not None and weights is None:
        raise ValueError("give both t_list and weights or neither")
    tau, n_empty = tau_A_many(model, [record], [f], t_list, weights)
    return TimeField(model, tau[:, 0], "tau_A", {"ladder": "default" if t_list is None else "custom"},
                     n_empty > 0)


def combine(fields, weights=None):
    """Normalised weighted sum (default weights ``2**-n``, ``n = 1, 2, ...``)."""
    fields = list(fields)
    if not fields:
        raise ValueError("nothing to combine")
    m = fields[0].model
    for f in fields[1:]:
        if f.model is not m and (f.model.shape != m.shape or f.model.spec != m.spec):
            raise ValueError("fields live on different grids")
    w = 2.0 ** -np.arange(1, len(fields) + 1) if weights is None else np.asarray(weights, float)
    if w.shape != (len(fields),) or np.any(w <= 0):
        raise ValueError("weights must be positive, one per field")
    w = w / w.sum()
    total = np.zeros(m.n_nodes)
    for wi, f in zip(w, fields):
        total += wi * f.values
    return TimeField(m, np.clip(total, 0.0, 1.0), "tau_combined",
                     {"weights": w.tolist(), "n_fields": len(fields)})


def edge_monotonicity(model, tau, exclude=None, tol=1e-9):
    """Edge-wise audit of ``tau`` on the step graph.

    Returns a dict with the number of edges decreasing by more than ``tol``,
    the smallest increment over all edges, and over the audited edges
    (source outside ``exclude``) the number of non-strict edges and the
    smallest increment (the strictness margin).
    """
    vals = np.asarray(getattr(tau, "values", tau), float)
    st = model.step.tocoo()
    inc = vals[st.col] - vals[st.row]
    audited = np.ones(st.nnz, bool) if exclude is None else ~np.asarray(exclude, bool)[st.row]
    return {
        "n_edges": int(st.nnz),
        "violations": int(np.sum(inc < -tol)),
        "min_increment": float(inc.min()) if inc.size else 0.0,
        "n_audited": int(audited.sum()),
        "non_strict": int(np.sum(inc[audited] <= 0)),
        "strict_margin": float(inc[audited].min()) if audited.any() else float("nan"),
        "non_strict_sources": np.unique(st.row[audited & (inc <= 0)]),
    }


@dataclass(frozen=True)
class PipelineParams:
    """Parameters of :func:`global_time_function` (``None`` means model default)."""

    resolution: int | tuple = 64
    r_step: float | None = None
    eta: float | None = None
    L_cap: float = 3.0
    eps: float | None = None
    T: float = 0.5
    T_cap: float | None = None
    alpha: float = 0.5
    t0_widened: float = 1.0
    max_records: int = 24
    rounds: int = 4

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown pipeline parameters {sorted(unknown)}")
        d = dict(d)
        if isinstance(d.get("resolution"), list):
            d["resolution"] = tuple(d["resolution"])
        return cls(**d)


def _fit_to_recurrence(model, rec, R):
    """Shorten the basin horizon of ``rec`` until ``R`` lies in ``A`` or off ``B``.

    Every chain recurrent point sits either in an attractor or outside its
    basin, so ``tau_A`` is 1 or 0 there.  On the grid ``R`` is computed at a
    finite ``eps`` and can straddle ``B \\ A``; since the basin depth never
    increases along a step, cutting the horizon just below the shallowest
    offending node removes all of them and keeps ``B`` forward closed.
    Returns ``None`` when the cut would drop part of ``U``.
    """
    mixed = R & rec.B & ~rec.A
    if not mixed.any():
        return rec
    m, exit_bad = basin_depth(model, rec.U)
    t_max = float(m[mixed].min())
    B = m < t_max - RTOL * max(1.0, t_max)
    if np.any(rec.U & ~B):
        return None
    return dataclasses.replace(rec, B=B, undecided=B & exit_bad, t_max=t_max,
                               flags={**rec.flags, "horizon": "cut at the recurrent set"})


def _gain(rec):
    return rec.B & ~rec.A & ~rec.undecided


def _merge_into(model, pool, rec, R):
    """Replace a record of ``pool`` by its union with ``rec`` when nothing is lost.

    A union of pre-attractors with a common ``t0`` is a pre-attractor whose
    attractor is the union of the attractors, so one merged record can carry
    the strict increase of both.  The merge is kept only if its decided
    ``B \\ A`` contains both originals.
    """
    for i, old in enumerate(pool):
        if old.t0 != rec.t0:
            continue
        try:
            merged = attractor_of(model, old.U | rec.U, rec.t0)
        except ValueError:
            continue
        merged = _fit_to_recurrence(model, merged, R)
        if merged is not None and not np.any((_gain(old) | _gain(rec)) & ~_gain(merged)):
            n = old.flags.get("merged", 1) + rec.flags.get("merged", 1)
            first = old.source.split(" ")[0]
            pool[i] = dataclasses.replace(merged, source=f"{first} +{n - 1} merged",
                                          flags={**merged.flags, "merged": n})
            return True
    return False


def _records_for_seed(model, graph, report, wide, x, params, seen):
    """Attractor records placing ``x`` in ``B \\ A``, from both candidate sources."""
    cands = []
    if wide is not None:
        cands += [(U, t0, "widened") for U, t0 in
                  candidates_from_widened_futures(model, params.alpha, x, params.t0_widened, wide=wide)]
    cands += [(U, t0, "chains") for U, t0 in candidates_from_chains(model, graph, x, report)]
    out = []
    for U, t0, src in cands:
        key = (np.packbits(U).tobytes(), t0)
        if key in seen:
            continue
        seen.add(key)
        rec = _fit_to_recurrence(model, attractor_of(model, U, t0, source=f"{src}:{x}"), report.mask)
        if rec is not None and rec.B[x] and not rec.A[x]:
            out.append(rec)
    return out


def global_time_function(spec, params=None, model=None):
    """End-to-end synthesis of a time function that is strict off the chain recurrent set.

    Seeds are picked greedily among nodes not yet in ``B \\ A`` of an
    accepted record (earliest in the causal order first), then among
    sources of non-strict edges.  Returns ``(tau, report)``.
    """
    params = PipelineParams() if params is None else params
    if isinstance(params, dict):
        params = PipelineParams.from_dict(params)
    if model is None:
        model = build_grid_model(spec, params.resolution, params.r_step, params.eta, params.L_cap)
    N = model.n_nodes
    eps = model.spacing if params.eps is None else params.eps
    graph = build_chain_graph(model, eps, params.T, params.T_cap)
    report = chain_recurrent_set(graph)
    R = report.mask
    wide = widened_model(model, params.alpha) if params.alpha > 0 else None

    records, fs = [], []
    covered = np.zeros(N, bool)
    decided = np.zeros(N, bool)
    tried = np.zeros(N, bool)
    seen = set()
    tau_cols = np.zeros((N, 0))
    n_empty = np.zeros(N, np.int64)
    ladder = default_ladder(model)
    stats = None
    for rnd in range(params.rounds):
        pending = []
        while len(records) + len(pending) < params.max_records:
            open_nodes = ~R & ~covered & ~tried
            if rnd > 0 and stats is not None:
                open_nodes &= np.isin(np.arange(N), stats["non_strict_sources"])
            if not open_nodes.any():
                break
            cand = np.flatnonzero(open_nodes)
            x = int(cand[np.argmin(model.comp_pos[cand])])
            tried[x] = True
            new = _records_for_seed(model, graph, report, wide, x, params, seen)
            for rec in new:
                covered |= rec.B & ~rec.A
                decided |= rec.B & ~rec.A & ~rec.undecided
            for rec in new:
                if not _merge_into(model, pending, rec, R):
                    pending.append(rec)
            log.debug("seed %d: %d new records", x, len(new))
        if pending:
            new_fs = [build_f(model, r) for r in pending]
            cols, ne = tau_A_many(model, pending, new_fs, *ladder)
            tau_cols = np.hstack([tau_cols, cols])
            n_empty = np.maximum(n_empty, ne)
            records += pending
            fs += new_fs
        if not records:
            break
        tau = combine([TimeField(model, tau_cols[:, i], "tau_A") for i in range(len(records))])
        stats = edge_monotonicity(model, tau, exclude=R | ~decided)
        if stats["non_strict"] == 0 or len(records) >= params.max_records or not pending:
            break

    if records:
        tau = combine([TimeField(model, tau_cols[:, i], "tau_A") for i in range(len(records))])
    else:
        tau = TimeField(model, np.zeros(N), "tau_combined", {"weights": [], "n_fields": 0})
    undecided = ~R & ~decided
    stats = edge_monotonicity(model, tau, exclude=R | undecided)
    impossible = bool(R.all())
    rep = {
        "n_nodes": N,
        "R": R,
        "records": records,
        "tau_A": tau_cols,
        "undecided": undecided,
        "undecided_count": int(undecided.sum()),
        "empty_future_count": int((n_empty > 0).sum()),
        "edges": {k: v for k, v in stats.items() if k != "non_strict_sources"},
        "ladder": {"rungs": int(len(ladder[0])), "delta": float(ladder[0][1] - ladder[0][0])},
        "chain_graph": {"eps": float(np.max(graph.eps)), "T": graph.T, "T_cap": graph.T_cap,
                        "n_edges": graph.n_edges},
        "time_function_impossible": impossible,
        "note": ("chain recurrent set is the whole chart: no strictly increasing time function exists"
                 if impossible else ""),
    }
    tau = dataclasses.replace(tau, provenance={**tau.provenance, "records": len(records)},
                              flags=undecided)
    return tau, rep
