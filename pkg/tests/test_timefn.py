from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cached_model
from causet import _kernels
from causet.adapted import h_distance_from
from causet.attract import attractor_of, is_pre_attractor
from causet.chains import build_chain_graph
from causet.grid import build_grid_model
from causet.reach import reach_interval
from causet.spacetime import builtin
from causet.timefn import (
    PipelineParams,
    TimeField,
    _sweep_args,
    _values,
    build_f,
    combine,
    default_ladder,
    edge_monotonicity,
    g_t_field,
    global_time_function,
    tau_A,
)


@pytest.fixture(scope="module")
def cyl_record():
    # a short horizon keeps the basin a proper subset of the chart
    m = cached_model("cylinder-tilt", 16)
    return m, attractor_of(m, m.points[:, 0] > -0.3, 0.3, t_max=0.5)


@pytest.fixture(scope="module")
def pipelines():
    out = {}
    for metric in ("minkowski", "torus", "cylinder-tilt"):
        out[metric] = global_time_function(builtin(metric), {"resolution": 16})
    out["minkowski-32"] = global_time_function(builtin("minkowski"), {"resolution": 32})
    out["cylinder-tilt-32"] = global_time_function(builtin("cylinder-tilt"), {"resolution": 32})
    return out


def test_f_formula_example():
    m = build_grid_model(builtin("minkowski"), 20)
    x = m.points[:, 0]
    rec = SimpleNamespace(A=x < 0.8 + 1e-9, B=x < 1.3 - 1e-9, t0=0.3, source="")
    k = m.node_at((1.0, 0.0))
    assert build_f(m, rec).values[k] == pytest.approx(0.4, abs=1e-12)


def test_f_pinned_on_A_and_off_B(cyl_record):
    m, rec = cyl_record
    f = build_f(m, rec).values
    assert np.all(f[rec.A] == 0.0) and np.all(f[~rec.B] == 1.0)
    inside = rec.B & ~rec.A
    assert np.all((f[inside] > 0) & (f[inside] < 1))


def test_f_empty_attractor_and_full_basin(model):
    m = model("minkowski", 16)
    N = m.n_nodes
    rec = SimpleNamespace(A=np.zeros(N, bool), B=np.ones(N, bool), t0=0.3, source="")
    assert np.all(build_f(m, rec).values == 0.5)
    A = m.points[:, 0] > 1.5
    f = build_f(m, SimpleNamespace(A=A, B=np.ones(N, bool), t0=0.3, source="")).values
    mu = np.minimum(1.0, h_distance_from(m, A))
    assert np.allclose(f, mu / (mu + 1.0))
    with pytest.raises(ValueError):
        build_f(m, SimpleNamespace(A=A, B=np.zeros(N, bool), t0=0.3, source=""))


def test_g_of_zero_is_zero(model):
    m = model("cylinder-tilt", 16)
    g = g_t_field(m, TimeField(m, np.zeros(m.n_nodes), "f"), 0.5)
    assert np.all(g.values == 0.0)
    with pytest.raises(ValueError):
        g_t_field(m, TimeField(m, np.zeros(m.n_nodes), "f"), 0.0)


def test_g_is_one_off_basin(cyl_record):
    m, rec = cyl_record
    f = build_f(m, rec)
    assert (~rec.B).any()
    hits = 0
    for t in (0.25, 1.0):
        g = g_t_field(m, f, t)
        for p in np.flatnonzero(~rec.B):
            r = reach_interval(m, p)
            if np.any(r.mask(t) & ~rec.B):
                assert g.values[p] == 1.0
                hits += 1
            else:
                # the only way out of the complement is through the chart edge
                assert r.boundary_exit.any()
        assert hits > 0
        assert np.all(g_t_field(m, f, t, record=rec).values[~rec.B] == 1.0)


def test_g_small_deep_in_basin(cyl_record):
    m, rec = cyl_record
    f = build_f(m, rec)
    p = m.node_at((-0.25, 1.0))
    cell = m.spacing * np.sqrt(2)
    margin = h_distance_from(m, ~rec.B)[rec.A].min()
    assert rec.B[p] and not rec.A[p] and np.isfinite(margin)
    assert g_t_field(m, f, 2.5).values[p] <= 2 * cell / (cell + margin)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.5])
def test_g_anti_monotone_on_edges(t, cyl_record):
    m, rec = cyl_record
    g = g_t_field(m, build_f(m, rec), t).values
    st_ = m.step.tocoo()
    assert np.all(g[st_.col] <= g[st_.row] + 1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 255), st.floats(0.05, 2.0))
def test_g_anti_monotone_on_futures(p, t):
    m = cached_model("cylinder-tilt", 16)
    rec = attractor_of(m, m.points[:, 0] > -0.3, 0.3, t_max=0.5)
    g = g_t_field(m, build_f(m, rec), t).values
    fut = reach_interval(m, p).reached
    assert np.all(g[fut] <= g[p] + 1e-15)


def test_tau_examples(cyl_record):
    m, rec = cyl_record
    f = build_f(m, rec)
    single = tau_A(m, f, [0.5], [1.0])
    assert np.allclose(single.values, 1.0 - g_t_field(m, f, 0.5).values, atol=1e-15)
    tau = tau_A(m, f, record=rec).values
    assert np.all(tau[rec.A] == 1.0) and np.all(tau[~rec.B] == 0.0)
    assert np.all((tau >= 0) & (tau <= 1))
    with pytest.raises(ValueError):
        tau_A(m, f, [0.5, 1.0], [0.5, 0.4])
    with pytest.raises(ValueError):
        tau_A(m, f, [0.5, 1.0], [1.0])
    with pytest.raises(ValueError):
        tau_A(m, f, [1.0, 0.5], [0.5, 0.5])
    with pytest.raises(ValueError):
        tau_A(m, f, [0.5], None)


def test_default_ladder(model):
    m = model("cylinder-tilt", 32)
    ts, w = default_ladder(m)
    assert ts[0] == 0.0 and np.all(np.diff(ts) > 0) and ts[-1] < m.L_cap
    assert w.sum() == 1.0 and np.all(w == w[0])
    assert ts[1] <= m.step.data.min() / 2


def test_combine(model, cyl_record):
    m, rec = cyl_record
    a = tau_A(m, build_f(m, rec), record=rec)
    assert np.allclose(combine([a]).values, a.values)
    assert np.allclose(combine([a, a]).values, a.values)
    b = TimeField(m, np.full(m.n_nodes, 0.3), "tau_A")
    assert np.allclose(combine([a, b], [1.0, 3.0]).values, 0.25 * a.values + 0.225)
    other = model("cylinder-tilt", 12)
    with pytest.raises(ValueError):
        combine([a, TimeField(other, np.zeros(other.n_nodes), "tau_A")])
    with pytest.raises(ValueError):
        combine([])
    with pytest.raises(ValueError):
        combine([a, b], [1.0, -1.0])


def test_two_band_records_increase_along_time_axis(model):
    m = model("minkowski", 32)
    x, y = m.points.T
    fields, covered = [], np.zeros(m.n_nodes, bool)
    for c in (0.8, 1.4):
        rec = attractor_of(m, x > c, 0.3, t_max=1.0)
        fields.append(tau_A(m, build_f(m, rec), record=rec))
        covered |= rec.B & ~rec.A
    tau = combine(fields).values
    axis = np.flatnonzero(np.isclose(y, 0.0) & covered)
    axis = axis[np.argsort(x[axis])]
    assert axis.size > 10
    assert np.all(np.diff(tau[axis]) > 0)
    assert edge_monotonicity(m, tau)["violations"] == 0


def test_edge_monotonicity_counts(model):
    m = model("minkowski", 16)
    tau = m.points[:, 0] / 2.0
    rep = edge_monotonicity(m, tau)
    assert rep["violations"] == 0 and rep["non_strict"] == 0 and rep["strict_margin"] > 0
    bad = edge_monotonicity(m, -tau)
    assert bad["violations"] == bad["n_edges"]
    rep = edge_monotonicity(m, np.zeros(m.n_nodes), exclude=np.ones(m.n_nodes, bool))
    assert rep["n_audited"] == 0


@pytest.mark.parametrize("key", ["minkowski", "minkowski-32"])
def test_pipeline_minkowski_strict_everywhere(key, pipelines):
    tau, rep = pipelines[key]
    e = rep["edges"]
    assert not rep["R"].any() and rep["records"]
    assert e["violations"] == 0 and e["min_increment"] > 0
    assert not rep["time_function_impossible"]


def test_pipeline_torus_impossible(pipelines):
    tau, rep = pipelines["torus"]
    assert rep["R"].all() and not rep["records"]
    assert np.all(tau.values == tau.values[0])
    assert rep["time_function_impossible"] and rep["note"]


@pytest.mark.parametrize("key", ["cylinder-tilt", "cylinder-tilt-32"])
def test_pipeline_cylinder_strict_off_R(key, pipelines):
    tau, rep = pipelines[key]
    m = tau.model
    R = rep["R"]
    assert R.any() and not R.all()
    assert rep["edges"]["violations"] == 0
    assert rep["edges"]["non_strict"] == 0 and rep["edges"]["strict_margin"] > 0
    st_ = m.step.tocoo()
    off = ~R[st_.row] & ~R[st_.col]
    assert np.all(tau.values[st_.col[off]] > tau.values[st_.row[off]])
    assert np.ptp(tau.values[R]) <= 1e-12
    merged = [r for r in rep["records"] if r.flags.get("merged", 1) > 1]
    assert all(r.source.endswith(f"+{r.flags['merged'] - 1} merged") for r in merged)


@pytest.mark.parametrize("key", ["minkowski", "cylinder-tilt", "minkowski-32", "cylinder-tilt-32"])
def test_records_recertify(key, pipelines):
    tau, rep = pipelines[key]
    m = tau.model
    for rec in rep["records"]:
        assert is_pre_attractor(m, rec.U, rec.t0).holds
        assert not np.any(rec.A & ~rec.U) and not np.any(rec.U & ~rec.B)
        # recurrent nodes sit in the attractor or outside the basin
        assert not np.any(rep["R"] & rec.B & ~rec.A)
        assert np.allclose(rep["tau_A"][:, rep["records"].index(rec)][rec.A], 1.0)


@pytest.mark.parametrize("key", ["minkowski", "cylinder-tilt"])
def test_decreasing_window(key, pipelines):
    tau, rep = pipelines[key]
    m = tau.model
    ts, _ = default_ladder(m)
    tol = 1e-9 * m.L_cap
    checked = 0
    for rec in rep["records"]:
        g, _ = _kernels.future_sup(*_sweep_args(m), _values([build_f(m, rec)]), ts, tol)
        g = np.where(rec.B[:, None], g[:, 0, :], 1.0)
        for x in np.flatnonzero(rec.B & ~rec.A & ~rec.undecided):
            r = reach_interval(m, x)
            ys = np.flatnonzero(r.reached & (r.lmin > 0))
            assert np.all(np.any(g[ys] < g[x], axis=1))
            checked += ys.size
    assert checked > 1000


def test_cycles_lie_in_R(pipelines):
    tau, rep = pipelines["cylinder-tilt"]
    m = tau.model
    g = build_chain_graph(m, m.spacing, 0.5)
    from scipy.sparse.csgraph import connected_components
    _, labels = connected_components(g.adjacency, directed=True, connection="strong")
    on_cycle = (np.bincount(labels)[labels] >= 2) | (g.adjacency.diagonal() > 0)
    assert on_cycle.any() and not np.any(on_cycle & ~rep["R"])


def test_params_from_dict():
    p = PipelineParams.from_dict({"resolution": [16, 24], "T": 0.25})
    assert p.resolution == (16, 24) and p.T == 0.25
    with pytest.raises(ValueError):
        PipelineParams.from_dict({"bogus": 1})
