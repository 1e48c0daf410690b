import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import sparse

import oracles
from conftest import cached_model
from causet.chains import (
    ChainGraph,
    approx_R,
    build_chain_graph,
    chain_reachable_from,
    chain_recurrent_set,
)
from causet.errors import ConfigError
from causet.spacetime import BUILTINS


@pytest.mark.parametrize("n", [8, 10, 12])
@pytest.mark.parametrize("metric", sorted(BUILTINS))
def test_oracle_equivalence(metric, n, model):
    m = model(metric, n)
    for eps in (m.spacing, 2 * m.spacing):
        g = build_chain_graph(m, eps, 0.5)
        A = oracles.chain_adjacency(m, eps, 0.5, 1.0)
        assert np.array_equal(g.adjacency.toarray(), A)
        assert np.array_equal(chain_recurrent_set(g).mask, np.diag(oracles.closure(A)))


def test_minkowski_edges_advance_in_time(model):
    m = model("minkowski", 32)
    g = build_chain_graph(m, m.spacing, 0.5)
    e = g.edges()
    x = m.points[:, 0]
    assert e.shape[0] > 0
    assert np.all(x[e[:, 1]] >= x[e[:, 0]] + 0.5 / np.sqrt(2) - 2 * m.spacing - 1e-12)
    assert not chain_recurrent_set(g).mask.any()
    # the 12x12 grid agrees by brute force
    s = model("minkowski", 12)
    assert not np.diag(oracles.closure(oracles.chain_adjacency(s, s.spacing, 0.5, 1.0))).any()


def test_torus_self_loops(model):
    m = model("torus", 8)
    g = build_chain_graph(m, m.spacing, 0.5, T_cap=1.0)
    assert np.all(g.adjacency.diagonal() > 0)
    assert chain_recurrent_set(g).mask.all()
    assert chain_recurrent_set(build_chain_graph(model("torus", 16), 1 / 16, 0.5)).mask.all()


def test_parameter_errors(model):
    m = model("minkowski", 16)
    with pytest.raises(ConfigError):
        build_chain_graph(m, m.spacing, 0.8, T_cap=0.5)
    with pytest.raises(ConfigError):
        build_chain_graph(m, m.spacing, 0.5, T_cap=4.0)
    with pytest.raises(ConfigError, match="0.125"):
        build_chain_graph(m, 0.5 * m.spacing, 0.5)


def test_edges_sorted_and_counted(model):
    m = model("cylinder-tilt", 12)
    g = build_chain_graph(m, m.spacing, 0.5)
    e = g.edges()
    assert e.shape == (g.n_edges, 2)
    assert np.all(np.diff(e[:, 0] * m.n_nodes + e[:, 1]) > 0)


def test_edgeless_graph_has_no_recurrence(model):
    m = model("minkowski", 8)
    g = ChainGraph(m, np.full(m.n_nodes, m.spacing), 0.5, 1.0, sparse.csr_matrix((m.n_nodes, m.n_nodes)))
    assert not chain_recurrent_set(g).mask.any()
    assert not chain_reachable_from(g, 3).any()


def test_scc_labels_stable_under_relabeling(model):
    m = model("cylinder-tilt", 12)
    g = build_chain_graph(m, m.spacing, 0.5)
    rep = chain_recurrent_set(g)
    perm = np.random.default_rng(3).permutation(m.n_nodes)
    A = g.adjacency[perm][:, perm]
    rep2 = chain_recurrent_set(ChainGraph(m, g.eps[perm], g.T, g.T_cap, sparse.csr_matrix(A)))
    assert np.array_equal(rep2.mask, rep.mask[perm])
    a, b = rep.labels[perm], rep2.labels
    # same partition: the label maps are bijective
    pairs = set(zip(a.tolist(), b.tolist()))
    assert len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


def test_chain_reachable_examples(model):
    m = model("minkowski", 32)
    g = build_chain_graph(m, m.spacing, 0.5)
    for x in (m.index(0, 16), m.index(10, 3)):
        assert not chain_reachable_from(g, x)[x]
    last = m.index(31, 16)
    assert g.adjacency[last].nnz == 0
    assert not chain_reachable_from(g, last).any()
    t = model("torus", 8)
    gt = build_chain_graph(t, t.spacing, 0.5, T_cap=1.0)
    for x in (0, 27, 63):
        assert chain_reachable_from(gt, x).all()


def test_chain_reachable_matches_closure(model):
    m = model("cylinder-tilt", 12)
    g = build_chain_graph(m, m.spacing, 0.5)
    D = oracles.all_pairs(m)
    C = oracles.closure(g.adjacency.toarray())
    for x in (0, 50, 100):
        want = (D[C[x]] <= m.spacing * (1 + 1e-9)).any(axis=0) if C[x].any() else np.zeros(m.n_nodes, bool)
        assert np.array_equal(chain_reachable_from(g, x), want)


def test_approx_R(model):
    m = model("minkowski", 32)
    s = m.spacing
    single = approx_R(m, [(s, 0.5)])
    assert np.array_equal(single.mask, chain_recurrent_set(build_chain_graph(m, s, 0.5)).mask)
    rep = approx_R(m, [(2 * s, 0.5), (s, 0.5), (s, 1.0)])
    assert len(rep.stages) == 3 and not any(st_.any() for st_ in rep.stages)
    with pytest.raises(ValueError):
        approx_R(m, [])
    with pytest.raises(ValueError):
        approx_R(m, [(s, 0.5), (2 * s, 0.5)])
    with pytest.raises(ValueError):
        approx_R(m, [(s, 0.5), (s, 0.25)])


def test_cylinder_recurrence_hugs_circle(model):
    m = model("cylinder-tilt", 32)
    s = m.spacing
    rep = approx_R(m, [(3 * s, 0.5), (2 * s, 0.5), (s, 0.5)])
    x = m.points[:, 0]
    for coarse, fine in zip(rep.stages, rep.stages[1:]):
        assert not np.any(fine & ~coarse)
    assert np.all(rep.mask[np.isclose(x, 0.0)])
    assert np.all(np.abs(x[rep.mask]) <= s + 1e-12)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(sorted(BUILTINS)), st.integers(1, 3), st.integers(0, 2),
       st.sampled_from([0.25, 0.5]), st.sampled_from([0.0, 0.25]))
def test_recurrence_monotone(metric, k, dk, T, dT):
    m = cached_model(metric, 12)
    s = m.spacing
    big = chain_recurrent_set(build_chain_graph(m, (k + dk) * s, T)).mask
    small = chain_recurrent_set(build_chain_graph(m, k * s, T + dT)).mask
    assert not np.any(small & ~big)
