import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from causet.errors import ConfigError, DomainError
from causet.spacetime import (
    BUILTINS,
    builtin,
    cone_at,
    is_future_causal,
    metric_at,
    metric_field,
    orientation_field,
    reverse_orientation,
    widen_cones,
)


def test_minkowski_metric_constant():
    s = builtin("minkowski")
    for p in [(0.0, 0.0), (1.3, -0.7), (2.0, 1.0)]:
        assert np.array_equal(metric_at(s, p), np.diag([-1.0, 1.0]))


def test_zero_tilt_is_minkowski():
    s = builtin("tilted", theta=0.0)
    assert np.allclose(metric_at(s, (0.5, 0.5)), np.diag([-1.0, 1.0]), atol=0)


def test_tilted_quarter_turn_matches_symbolic():
    th = sp.pi / 4
    R = sp.Matrix([[sp.cos(th), -sp.sin(th)], [sp.sin(th), sp.cos(th)]])
    G = sp.simplify(R * sp.diag(-1, 1) * R.T)
    expected = np.array(G.evalf(30).tolist(), dtype=float)
    got = metric_at(builtin("tilted"), (1.0, 0.0))
    assert np.allclose(got, expected, atol=1e-15)
    assert np.allclose(got, [[0.0, -1.0], [-1.0, 0.0]], atol=1e-15)


def test_outside_chart_raises():
    with pytest.raises(DomainError):
        metric_at(builtin("minkowski"), (2.5, 0.0))
    # periodic axes wrap instead
    assert np.array_equal(metric_at(builtin("torus"), (3.25, -7.5)), np.diag([-1.0, 1.0]))


@pytest.mark.parametrize(
    "alpha, v, expected",
    [(0.0, (1, 0), True), (0.0, (1, 2), False), (1.0, (1, 1.2), True), (0.0, (-1, 0), False)],
)
def test_is_future_causal_examples(alpha, v, expected):
    cone = cone_at(widen_cones(builtin("minkowski"), alpha), (0.5, 0.0))
    assert is_future_causal(cone, v, 0.0) is expected


def test_is_future_causal_argument_errors():
    cone = cone_at(builtin("minkowski"), (0.5, 0.0))
    with pytest.raises(ValueError):
        is_future_causal(cone, (0.0, 0.0))
    with pytest.raises(ValueError):
        is_future_causal(cone, (1.0, 0.0), slack=-0.1)


def test_widen_cones_examples():
    s = builtin("minkowski")
    assert widen_cones(s, 0.0) is s
    assert np.allclose(metric_at(widen_cones(s, 1.0), (0.3, 0.1)), np.diag([-2.0, 1.0]))
    with pytest.raises(ValueError):
        widen_cones(s, -0.1)
    # widening composes multiplicatively on the timelike eigenvalue
    assert widen_cones(widen_cones(s, 1.0), 1.0).alpha == pytest.approx(3.0)


def test_widened_tilted_cone_strictly_larger():
    base = builtin("tilted")
    wide = widen_cones(base, 1.0)
    phis = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    dirs = np.stack([np.cos(phis), np.sin(phis)], axis=1)
    p = (1.0, 0.0)
    inside = [is_future_causal(cone_at(base, p), v) for v in dirs]
    inside_w = [is_future_causal(cone_at(wide, p), v) for v in dirs]
    assert all(b <= w for b, w in zip(inside, inside_w))
    assert sum(inside_w) > sum(inside)


@pytest.mark.parametrize("metric", sorted(BUILTINS))
def test_signature_and_orientation(metric, model):
    m = model(metric, 32)
    eig = np.linalg.eigvalsh(m.g)
    assert np.all(np.linalg.det(m.g) < 0)
    assert np.all(eig[:, 0] < 0) and np.all(eig[:, 1] > 0)
    gTT = np.einsum("ni,nij,nj->n", m.T, m.g, m.T)
    assert np.all(gTT < 0)


@settings(max_examples=60, deadline=None)
@given(
    metric=st.sampled_from(sorted(BUILTINS)),
    a=st.floats(0.0, 2.0),
    da=st.floats(0.01, 2.0),
    u=st.floats(0.0, 1.0),
    w=st.floats(0.0, 1.0),
)
def test_cone_nesting(metric, a, da, u, w):
    s = builtin(metric)
    (x0, x1), (y0, y1) = s.chart
    p = (x0 + u * (x1 - x0), y0 + w * (y1 - y0))
    c_small = cone_at(widen_cones(s, a), p)
    wide = widen_cones(s, a + da)
    g_wide = metric_at(wide, p)
    for phi in np.linspace(0, 2 * np.pi, 64, endpoint=False):
        v = np.array([np.cos(phi), np.sin(phi)])
        if is_future_causal(c_small, v):
            assert v @ g_wide @ v < 0


def test_cylinder_circle_is_null():
    s = builtin("cylinder-tilt")
    g = metric_at(s, (0.0, 0.3))
    e_y = np.array([0.0, 1.0])
    assert abs(e_y @ g @ e_y) < 1e-15
    # null to rounding: a tiny slack absorbs the 1e-16 residue
    assert is_future_causal(cone_at(s, (0.0, 0.3)), e_y, slack=1e-12)
    # away from the circle pure y-motion is spacelike
    assert not is_future_causal(cone_at(s, (0.05, 0.3)), e_y)


@settings(max_examples=100, deadline=None)
@given(x=st.floats(-1.0, 1.0).filter(lambda x: abs(x) > 1e-3), phi=st.floats(0, 2 * np.pi))
def test_cylinder_future_moves_right_off_circle(x, phi):
    s = builtin("cylinder-tilt")
    v = np.array([np.cos(phi), np.sin(phi)])
    if is_future_causal(cone_at(s, (x, 0.0)), v):
        assert v[0] > 0


def test_reverse_orientation_flips_time():
    s = builtin("minkowski")
    r = reverse_orientation(s)
    assert np.array_equal(orientation_field(r, (0.5, 0.0)), -orientation_field(s, (0.5, 0.0)))
    assert reverse_orientation(r).param("reverse") == 0.0
    assert np.array_equal(metric_field(r, (0.5, 0.0)), metric_field(s, (0.5, 0.0)))


def test_builtin_validation():
    with pytest.raises(ConfigError):
        builtin("misner")
    with pytest.raises(ConfigError):
        builtin("minkowski", theta=1.0)
    with pytest.raises(ConfigError):
        builtin("minkowski", scale=-1.0)


def test_spec_round_trip():
    s = widen_cones(builtin("cylinder-tilt", k=12.0), 0.5)
    assert type(s).from_dict(s.to_dict()) == s
