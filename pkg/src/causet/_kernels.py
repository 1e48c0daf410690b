"""Compiled graph kernels over CSR step graphs.

Lengths are non-negative edge weights.  "Capped longest walk" values are
``min(cap, sup of walk lengths)``; nodes downstream of a cycle saturate at
``cap`` because walks may repeat the cycle.
"""

import heapq

import numpy as np
from numba import njit


@njit(cache=True)
def topo_components(indptr, indices, labels, ncomp):
    """Topological order of the condensation given SCC ``labels``.

    Returns ``(order_ptr, order_nodes, cyclic)`` where components appear in
    topological order and ``cyclic[c]`` marks components carrying a cycle.
    """
    n = labels.shape[0]
    counts = np.zeros(ncomp + 1, np.int64)
    for u in range(n):
        counts[labels[u] + 1] += 1
    comp_ptr = np.cumsum(counts)
    fill = comp_ptr[:-1].copy()
    comp_nodes = np.empty(n, np.int64)
    for u in range(n):
        c = labels[u]
        comp_nodes[fill[c]] = u
        fill[c] += 1

    indeg = np.zeros(ncomp, np.int64)
    cyclic = np.zeros(ncomp, np.bool_)
    for u in range(n):
        cu = labels[u]
        for e in range(indptr[u], indptr[u + 1]):
            cv = labels[indices[e]]
            if cv != cu:
                indeg[cv] += 1
            else:
                cyclic[cu] = True  # self-loop or intra-component edge

    queue = np.empty(ncomp, np.int64)
    head = 0
    tail = 0
    for c in range(ncomp):
        if indeg[c] == 0:
            queue[tail] = c
            tail += 1
    while head < tail:
        c = queue[head]
        head += 1
        for k in range(comp_ptr[c], comp_ptr[c + 1]):
            u = comp_nodes[k]
            for e in range(indptr[u], indptr[u + 1]):
                cv = labels[indices[e]]
                if cv != c:
                    indeg[cv] -= 1
                    if indeg[cv] == 0:
                        queue[tail] = cv
                        tail += 1

    order_ptr = np.zeros(ncomp + 1, np.int64)
    order_nodes = np.empty(n, np.int64)
    order_cyclic = np.zeros(ncomp, np.bool_)
    pos = 0
    for i in range(ncomp):
        c = queue[i]
        order_cyclic[i] = cyclic[c]
        for k in range(comp_ptr[c], comp_ptr[c + 1]):
            order_nodes[pos] = comp_nodes[k]
            pos += 1
        order_ptr[i + 1] = pos
    return order_ptr, order_nodes, order_cyclic


@njit(cache=True)
def longest_sweep(indptr, indices, weights, order_ptr, order_nodes, order_cyclic,
                  comp_pos, sources, cap):
    """Capped longest-walk length from ``sources``; ``-1`` marks unreached nodes."""
    n = indptr.shape[0] - 1
    val = np.full(n, -1.0)
    first = order_ptr.shape[0]
    for s in sources:
        val[s] = 0.0
        if comp_pos[s] < first:
            first = comp_pos[s]
    ncomp = order_ptr.shape[0] - 1
    for c in range(first, ncomp):
        lo = order_ptr[c]
        hi = order_ptr[c + 1]
        reached = False
        for k in range(lo, hi):
            if val[order_nodes[k]] >= 0.0:
                reached = True
                break
        if not reached:
            continue
        if order_cyclic[c]:
            for k in range(lo, hi):
                val[order_nodes[k]] = cap
        for k in range(lo, hi):
            u = order_nodes[k]
            vu = val[u]
            if vu < 0.0:
                continue
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                cand = vu + weights[e]
                if cand > cap:
                    cand = cap
                if cand > val[v]:
                    val[v] = cand
    return val


@njit(cache=True)
def dijkstra_min(indptr, indices, weights, sources):
    """Shortest path length from ``sources``; ``inf`` marks unreached nodes."""
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    done = np.zeros(n, np.bool_)
    heap = [(0.0, np.int64(0))]
    heap.pop()
    for s in sources:
        dist[s] = 0.0
        heapq.heappush(heap, (0.0, np.int64(s)))
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            nd = d + weights[e]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, np.int64(v)))
    return dist


@njit(cache=True)
def basin_scan(indptr, indices, weights, order_ptr, order_nodes, order_cyclic,
               comp_pos, cap, bad, exits):
    """Per node ``p``: the largest capped length to a reached ``bad`` node.

    Returns ``(m, exit_bad)``; ``m[p] = -1`` when no bad node is reached and
    ``exit_bad[p]`` marks futures touching a bad node with a chart-leaving step.
    """
    n = indptr.shape[0] - 1
    m = np.full(n, -1.0)
    exit_bad = np.zeros(n, np.bool_)
    src = np.empty(1, np.int64)
    for p in range(n):
        src[0] = p
        val = longest_sweep(indptr, indices, weights, order_ptr, order_nodes,
                            order_cyclic, comp_pos, src, cap)
        for z in range(n):
            if val[z] >= 0.0 and bad[z]:
                if val[z] > m[p]:
                    m[p] = val[z]
                if exits[z]:
                    exit_bad[p] = True
    return m, exit_bad


@njit(cache=True)
def _ladder_sup(val, values, ts, tol):
    """``out[r, k] = max(values[r, z] for reached z with val[z] >= ts[k])``; 0 if empty."""
    nrec = values.shape[0]
    K = ts.shape[0]
    out = np.zeros((nrec, K))
    hit = np.zeros(K, np.bool_)
    for z in range(val.shape[0]):
        lz = val[z]
        if lz < 0.0:
            continue
        # number of rungs with ts[k] <= lz + tol, rungs sorted increasingly
        k = np.searchsorted(ts, lz + tol, side="right") - 1
        if k < 0:
            continue
        hit[k] = True
        for r in range(nrec):
            if values[r, z] > out[r, k]:
                out[r, k] = values[r, z]
    for k in range(K - 2, -1, -1):
        if hit[k + 1]:
            hit[k] = True
        for r in range(nrec):
            if out[r, k + 1] > out[r, k]:
                out[r, k] = out[r, k + 1]
    return out, hit


@njit(cache=True)
def future_sup(indptr, indices, weights, order_ptr, order_nodes, order_cyclic,
               comp_pos, cap, values, ts, tol):
    """``g[p, r, k] = max of values[r] over {z : lmax_p(z) >= ts[k]}`` and emptiness flags."""
    n = indptr.shape[0] - 1
    nrec = values.shape[0]
    K = ts.shape[0]
    g = np.zeros((n, nrec, K))
    empty = np.zeros((n, K), np.bool_)
    src = np.empty(1, np.int64)
    for p in range(n):
        src[0] = p
        val = longest_sweep(indptr, indices, weights, order_ptr, order_nodes,
                            order_cyclic, comp_pos, src, cap)
        out, hit = _ladder_sup(val, values, ts, tol)
        g[p] = out
        for k in range(K):
            empty[p, k] = not hit[k]
    return g, empty


@njit(cache=True)
def weighted_future_sup(indptr, indices, weights, order_ptr, order_nodes, order_cyclic,
                        comp_pos, cap, values, ts, tol, w):
    """``s[p, r] = sum_k w[k] g[p, r, k]`` without storing ``g``.

    Also returns, per node, the number of rungs with an empty future.  The
    sum runs in a fixed order, so it is monotone in every ``g`` even under
    rounding.
    """
    n = indptr.shape[0] - 1
    nrec = values.shape[0]
    K = ts.shape[0]
    s = np.zeros((n, nrec))
    n_empty = np.zeros(n, np.int64)
    src = np.empty(1, np.int64)
    for p in range(n):
        src[0] = p
        val = longest_sweep(indptr, indices, weights, order_ptr, order_nodes,
                            order_cyclic, comp_pos, src, cap)
        out, hit = _ladder_sup(val, values, ts, tol)
        for k in range(K):
            if not hit[k]:
                n_empty[p] += 1
            for r in range(nrec):
                s[p, r] += w[k] * out[r, k]
    return s, n_empty
