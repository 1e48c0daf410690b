"""Independent audits: random causal curves, monotonicity, chain certificates and length bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import _kernels
from ._frames import in_frame, orthonormal_frame, quad
from .adapted import h_distance_from, h_length
from .chains import build_chain_graph, chain_recurrent_set
from .errors import GenerationError
from .grid import _shift, segment_lengths
from .reach import RTOL
from .spacetime import ConeSample, _base_fields, causal_test, is_future_causal

__all__ = [
    "CurveSample",
    "audit_monotone",
    "check_local_length_bound",
    "check_semicontinuity_constant",
    "no_chain_certificate",
    "sample_causal_curves",
    "zigzag_family",
]


@dataclass(frozen=True, eq=False)
class CurveSample:
    """A random discrete causal curve.

    ``points`` are unwrapped chart coordinates (periodic axes may run past
    the chart), ``nodes`` the lattice nodes visited and ``causal`` the
    per-segment certificate.  ``truncated`` marks curves stopped by a step
    leaving the chart.
    """

    points: np.ndarray
    nodes: np.ndarray
    causal: np.ndarray
    length: float
    seed: int
    truncated: bool


def _causal_offsets(model):
    """Tables ``(N, n_offsets)``: causal offsets, their targets, validity and h-lengths."""
    steps = model.steps
    ok = np.zeros((model.n_nodes, len(model.offsets)), bool)
    targets = np.zeros_like(ok, dtype=np.int64)
    valid = np.zeros_like(ok)
    weights = np.zeros(ok.shape)
    for k, (di, dj) in enumerate(model.offsets):
        v = np.array([di * steps[0], dj * steps[1]])
        ok[:, k] = causal_test(model.g, model.T, model.alpha, v, model.eta)
        targets[:, k], valid[:, k] = _shift(model.spec, model.shape, di, dj)
        rows = valid[:, k]
        weights[rows, k] = segment_lengths(model.spec, model.points[rows], v, model.spacing)
    return ok, targets, valid, weights


def sample_causal_curves(model, count, length_target, seed, starts=None):
    """Random walks along causal lattice steps, each until ``length_target`` is reached.

    Every step is drawn uniformly among the causal offsets of the current
    node; a draw that leaves the chart truncates the curve.  ``starts``
    optionally fixes the start nodes (cycled), otherwise they are uniform.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0 < length_target <= model.L_cap * (1 + RTOL):
        raise ValueError("length_target must lie in (0, L_cap]")
    rng = np.random.default_rng(seed)
    ok, targets, valid, weights = _causal_offsets(model)
    steps = model.steps
    out = []
    for c in range(count):
        node = int(rng.integers(model.n_nodes)) if starts is None else int(starts[c % len(starts)])
        pts = [model.points[node].copy()]
        nodes = [node]
        cert = []
        total = 0.0
        truncated = False
        while total < length_target:
            choices = np.flatnonzero(ok[node])
            if choices.size == 0:
                raise GenerationError(f"node {node} has no causal step")
            k = int(choices[rng.integers(choices.size)])
            if not valid[node, k]:
                truncated = True
                break
            v = model.offsets[k] * steps
            cone = ConeSample(model.points[node], model.g[node], model.T[node], model.alpha)
            cert.append(is_future_causal(cone, v, model.eta))
            total += weights[node, k]
            pts.append(pts[-1] + v)
            node = int(targets[node, k])
            nodes.append(node)
        pts = np.array(pts)
        length = h_length(model.field, pts, model.spacing) if len(pts) > 1 else 0.0
        out.append(CurveSample(pts, np.array(nodes), np.array(cert, bool), length, int(seed), truncated))
    return out


def audit_monotone(tau, curves, strict_mask=None, tol=1e-9):
    """Check ``tau`` along sampled curves.

    A segment violates monotonicity when ``tau`` drops by more than ``tol``;
    strictness (increase > 0) is audited on segments whose endpoints both
    lie outside ``strict_mask``.
    """
    vals = np.asarray(getattr(tau, "values", tau), float)
    skip = np.zeros(vals.shape, bool) if strict_mask is None else np.asarray(strict_mask, bool)
    per_curve = []
    n_seg = n_aud = n_strict_fail = 0
    margin = np.inf
    for c in curves:
        a, b = c.nodes[:-1], c.nodes[1:]
        inc = vals[b] - vals[a]
        viol = np.flatnonzero(inc < -tol)
        audited = ~skip[a] & ~skip[b]
        fails = np.flatnonzero(audited & (inc <= 0))
        per_curve.append({"violations": viol.tolist(), "strict_failures": fails.tolist()})
        n_seg += inc.size
        n_aud += int(audited.sum())
        n_strict_fail += fails.size
        if audited.any():
            margin = min(margin, float(inc[audited].min()))
    return {
        "curves": len(curves),
        "segments": n_seg,
        "violations": sum(len(p["violations"]) for p in per_curve),
        "audited": n_aud,
        "strict_failures": n_strict_fail,
        "min_audited_increment": margin if n_aud else float("nan"),
        "truncated": sum(bool(c.truncated) for c in curves),
        "per_curve": per_curve,
    }


def _future_inf(model, vals, T):
    """Per node: min of ``vals`` over ``J+_{T, L_cap}`` and whether that set is non-empty."""
    st = model.step
    args = (st.indptr.astype(np.int64), st.indices.astype(np.int64), st.data.astype(float),
            model.order_ptr, model.order_nodes, model.order_cyclic, model.comp_pos, float(model.L_cap))
    tol = RTOL * max(1.0, model.L_cap)
    # sup of (1 - vals) is 1 - inf of vals; vals lie in [0, 1]
    g, empty = _kernels.future_sup(*args, np.ascontiguousarray((1.0 - vals)[None, :]),
                                   np.array([float(T)]), tol)
    return 1.0 - g[:, 0, 0], ~empty[:, 0]


def no_chain_certificate(model, tau, T, max_radius=8):
    """Certify that no ``(eps, T)``-chain returns to its start.

    ``alpha`` is the least increase of ``tau`` from a node to its
    ``J+_{T, L_cap}``.  Around each node ``eps`` is the largest multiple of
    the spacing (at most ``max_radius``) on whose h-ball ``tau`` varies by
    less than ``alpha / 2``, so a jump can undo at most half of a segment's
    gain.  The verdict comes from an actual cycle search on the resulting
    chain graph.
    """
    if not 0 < T <= model.L_cap / 2 * (1 + RTOL):
        raise ValueError("need 0 < T <= L_cap / 2")
    vals = np.asarray(getattr(tau, "values", tau), float)
    inf_fut, nonempty = _future_inf(model, vals, T)
    gain = np.where(nonempty, inf_fut - vals, np.inf)
    x = int(np.argmin(gain))
    alpha = float(gain[x])
    if not alpha > 0:
        from .reach import reach_interval

        fut = reach_interval(model, x).mask(T)
        ys = np.flatnonzero(fut)
        y = int(ys[np.argmin(vals[ys])])
        return {"verdict": "impossible", "alpha": alpha, "pair": (x, y), "eps": None, "acyclic": None}
    s = model.spacing
    eps = np.full(model.n_nodes, s)
    guaranteed = np.zeros(model.n_nodes, bool)
    for p in range(model.n_nodes):
        d = h_distance_from(model, [p], limit=max_radius * s * (1 + RTOL))
        for k in range(1, max_radius + 1):
            ball = d <= k * s * (1 + RTOL)
            if np.abs(vals[ball] - vals[p]).max() < alpha / 2:
                eps[p] = k * s
                guaranteed[p] = True
            else:
                break
    graph = build_chain_graph(model, eps, T, 2 * T)
    rec = chain_recurrent_set(graph)
    acyclic = not rec.mask.any()
    return {
        "verdict": "acyclic" if acyclic else "cyclic",
        "alpha": alpha,
        "pair": None,
        "eps": eps,
        "eps_guaranteed": guaranteed,
        "acyclic": acyclic,
        "recurrent": rec.mask,
    }


def zigzag_family(base, length, slopes, teeth):
    """Zigzags about the segment ``base -> base + (length, 0)``.

    Member ``i`` has ``teeth[i]`` teeth of transverse slope ``slopes[i]``;
    its amplitude ``slope * length / (2 * teeth)`` shrinks as the teeth
    multiply, so the family converges to the segment.  Returns
    ``(limit, members)``.
    """
    base = np.asarray(base, float)
    limit = np.array([base, base + [length, 0.0]])
    members = []
    for beta, k in zip(slopes, teeth):
        t = np.linspace(0.0, length, 2 * k + 1)
        x = np.zeros_like(t)
        x[1::2] = beta * length / (2 * k)
        members.append(base + np.stack([t, x], axis=1))
    return limit, members


def check_semicontinuity_constant(model, limit, members):
    """Ratios ``l_h(limit) / l_h(member)`` for a family of causal polylines.

    Every member segment must be future causal without slack.  Returns the
    ratio table with its infimum and whether the ratios decrease
    monotonically.
    """
    field = model.field
    for i, curve in enumerate(members):
        g, T = _base_fields(model.spec, curve[:-1])
        v = np.diff(curve, axis=0)
        ok = (quad(g, v) <= 1e-12 * quad(field.at(curve[:-1]), v)) & (quad(g, v, T) < 0)
        if not ok.all():
            raise ValueError(f"family member {i} is not causal")
    ref = h_length(field, limit, model.spacing)
    ratios = np.array([ref / h_length(field, c, model.spacing) for c in members])
    return {
        "ratios": ratios,
        "infimum": float(ratios.min()),
        "monotone": bool(np.all(np.diff(ratios) <= 1e-12)),
        "limit_length": ref,
    }


def check_local_length_bound(model, window, frame_tol=0.5, h_bound=2.0, tolerance=0.05):
    """Longest causal step path inside ``window`` against ``2 sqrt(3) (t1 - t0)``.

    ``window`` is ``((x0, x1), (y0, y1))`` in chart coordinates.  In the
    orthonormal frame of the window centre the metric at every window node
    must stay within ``frame_tol`` of ``diag(-1, 1)`` and the adapted metric
    below ``h_bound`` times the identity; otherwise the verdict is
    ``"inapplicable"``.  ``t`` is the frame time coordinate of the centre.
    """
    (a0, a1), (b0, b1) = window
    P = model.points
    inside = (P[:, 0] >= a0 - 1e-12) & (P[:, 0] <= a1 + 1e-12) & (P[:, 1] >= b0 - 1e-12) & (P[:, 1] <= b1 + 1e-12)
    idx = np.flatnonzero(inside)
    if idx.size == 0:
        raise ValueError("window contains no node")
    centre = np.array([(a0 + a1) / 2, (b0 + b1) / 2])
    gc, Tc = _base_fields(model.spec, centre)
    E = orthonormal_frame(gc, Tc)
    G = in_frame(model.g[idx], E)
    H = in_frame(model.h[idx], E)
    deviation = float(np.abs(G - np.diag([-1.0, 1.0])).max())
    h_top = float(np.linalg.eigvalsh(H).max())
    # frame time of the window corners
    corners = np.array([[a0, b0], [a0, b1], [a1, b0], [a1, b1]]) - centre
    tcoord = -(corners @ gc @ E[:, 0])
    extent = float(tcoord.max() - tcoord.min())
    bound = 2.0 * np.sqrt(3.0) * extent * (1 + tolerance)
    sub = model.step[idx][:, idx].tocsr()
    sub.sort_indices()
    ncomp, labels = connected_components(sub, directed=True, connection="strong")
    indptr = sub.indptr.astype(np.int64)
    indices = sub.indices.astype(np.int64)
    order_ptr, order_nodes, order_cyclic = _kernels.topo_components(indptr, indices, labels.astype(np.int64), ncomp)
    comp_pos = np.empty(idx.size, np.int64)
    comp_pos[order_nodes] = np.repeat(np.arange(ncomp), np.diff(order_ptr))
    cap = 1e6
    val = _kernels.longest_sweep(indptr, indices, sub.data.astype(float), order_ptr, order_nodes,
                                 order_cyclic, comp_pos, np.arange(idx.size, dtype=np.int64), cap)
    longest = float(val.max())
    applicable = deviation <= frame_tol and h_top <= h_bound
    return {
        "verdict": ("holds" if longest <= bound else "fails") if applicable else "inapplicable",
        "max_length": longest,
        "bound": bound,
        "frame_deviation": deviation,
        "h_max_eigenvalue": h_top,
        "t_extent": extent,
        "nodes": int(idx.size),
        "max_step_weight": float(sub.data.max()) if sub.nnz else 0.0,
    }
