"""Analytic 2-D time-oriented Lorentzian metrics.

A spacetime is a rectangular chart ``[x0, x1) x [y0, y1)`` (either axis may
be periodic) carrying a metric ``g`` of signature (-, +) and a timelike
orientation field ``T``.  All builtins have the form

    g = scale * Q(theta) diag(-1, 1) Q(theta)^T,   T = Q(theta) (cosh b, sinh b)

where ``Q(theta)`` is the rotation by the tilt angle ``theta(x)`` and ``b`` an
optional boost of the orientation inside the cone.  The builtin catalog is a
choice of this package:

``minkowski``
    ``-dx^2 + dy^2`` on ``[0, 2) x [-1, 1)``; stably causal.
``torus``
    The same metric on ``[0, 1)^2`` with both axes periodic; totally vicious.
``tilted``
    Constant tilt angle ``theta``; a rotated copy of Minkowski.
``cylinder-tilt``
    ``y`` periodic, ``theta(x) = (pi/4) sech^2(k x)``.  At ``x = 0`` the
    circle ``{x = 0}`` is null and closed; elsewhere every future direction
    has ``dx > 0``, so the circle is the only closed causal curve.

Cone widening (``alpha > 0``) rescales the timelike eigenvalue of ``g`` by
``1 + alpha`` in the orthonormal frame of ``T``; the result has strictly
wider cones.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ._frames import lower, quad, widen_matrix, wick_matrix
from .errors import ConfigError, DomainError

__all__ = [
    "BUILTINS",
    "ConeSample",
    "SpacetimeSpec",
    "builtin",
    "cone_at",
    "is_future_causal",
    "metric_at",
    "metric_field",
    "orientation_field",
    "reverse_orientation",
    "widen_cones",
    "wrap_points",
]


@dataclass(frozen=True)
class SpacetimeSpec:
    name: str
    metric: str
    chart: tuple[tuple[float, float], tuple[float, float]]
    periodic: tuple[bool, bool] = (False, False)
    params: Mapping[str, float] = field(default_factory=dict)
    alpha: float = 0.0

    def __post_init__(self):
        if self.metric not in BUILTINS:
            raise ConfigError(f"unknown metric builtin {self.metric!r}")
        (x0, x1), (y0, y1) = self.chart
        if not (x1 > x0 and y1 > y0):
            raise ConfigError(f"degenerate chart {self.chart!r}")
        if self.alpha < 0:
            raise ConfigError("widening parameter must be >= 0")
        if self.param("scale") <= 0:
            raise ConfigError("conformal scale must be positive")

    def param(self, key):
        return float(self.params.get(key, BUILTINS[self.metric]["params"].get(key, 0.0)))

    @property
    def extent(self):
        (x0, x1), (y0, y1) = self.chart
        return np.array([x1 - x0, y1 - y0])

    def to_dict(self):
        return {
            "name": self.name,
            "metric": self.metric,
            "chart": [list(self.chart[0]), list(self.chart[1])],
            "periodic": list(self.periodic),
            "params": dict(self.params),
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, d):
        base = builtin(d["metric"], **d.get("params", {}))
        chart = d.get("chart")
        return dataclasses.replace(
            base,
            name=d.get("name", base.name),
            chart=tuple(tuple(float(c) for c in ax) for ax in chart) if chart else base.chart,
            periodic=tuple(bool(p) for p in d.get("periodic", base.periodic)),
            alpha=float(d.get("alpha", 0.0)),
        )


BUILTINS = {
    "minkowski": {
        "chart": ((0.0, 2.0), (-1.0, 1.0)),
        "periodic": (False, False),
        "params": {"scale": 1.0, "boost": 0.0, "reverse": 0.0},
    },
    "torus": {
        "chart": ((0.0, 1.0), (0.0, 1.0)),
        "periodic": (True, True),
        "params": {"scale": 1.0, "boost": 0.0, "reverse": 0.0},
    },
    "tilted": {
        "chart": ((0.0, 2.0), (-1.0, 1.0)),
        "periodic": (False, False),
        "params": {"scale": 1.0, "boost": 0.0, "reverse": 0.0, "theta": np.pi / 4},
    },
    "cylinder-tilt": {
        "chart": ((-1.0, 1.0), (0.0, 2.0)),
        "periodic": (False, True),
        "params": {"scale": 1.0, "boost": 0.0, "reverse": 0.0, "k": 16.0},
    },
}


def builtin(metric, **params):
    """Return the catalog spacetime ``metric`` with optional parameter overrides."""
    if metric not in BUILTINS:
        raise ConfigError(f"unknown metric builtin {metric!r}; choose from {sorted(BUILTINS)}")
    entry = BUILTINS[metric]
    unknown = set(params) - set(entry["params"])
    if unknown:
        raise ConfigError(f"unknown parameters for {metric}: {sorted(unknown)}")
    merged = dict(entry["params"])
    merged.update({k: float(v) for k, v in params.items()})
    return SpacetimeSpec(metric, metric, entry["chart"], entry["periodic"], merged)


def widen_cones(spec, alpha):
    """Spacetime with cones widened by ``alpha``; ``alpha = 0`` is the identity.

    Widening composes multiplicatively on the timelike eigenvalue, so widening
    an already widened spec by ``b`` gives total factor ``(1 + a)(1 + b)``.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha == 0:
        return spec
    total = (1.0 + spec.alpha) * (1.0 + alpha) - 1.0
    return dataclasses.replace(spec, alpha=total)


def reverse_orientation(spec):
    """The time-reversed spacetime (orientation field negated)."""
    params = dict(spec.params)
    params["reverse"] = 0.0 if spec.param("reverse") else 1.0
    return dataclasses.replace(spec, params=params)


def wrap_points(spec, xy):
    """Map points into the chart, wrapping periodic axes.

    Non-periodic axes accept the closed interval ``[x0, x1]``; anything
    further out raises :class:`DomainError`.
    """
    xy = np.array(xy, dtype=float)
    for axis in range(2):
        lo, hi = spec.chart[axis]
        c = xy[..., axis]
        if spec.periodic[axis]:
            xy[..., axis] = lo + np.mod(c - lo, hi - lo)
        else:
            tol = 1e-12 * (hi - lo)
            if np.any(c < lo - tol) or np.any(c > hi + tol):
                raise DomainError(f"point outside chart on axis {axis}: range [{lo}, {hi}]")
    return xy


def tilt_angle(spec, xy):
    xy = np.asarray(xy, dtype=float)
    if spec.metric == "tilted":
        return np.full(xy.shape[:-1], spec.param("theta"))
    if spec.metric == "cylinder-tilt":
        k = spec.param("k")
        return (np.pi / 4) / np.cosh(k * xy[..., 0]) ** 2
    return np.zeros(xy.shape[:-1])


def _base_fields(spec, xy):
    theta = tilt_angle(spec, xy)
    c, s = np.cos(theta), np.sin(theta)
    t_dir = np.stack([c, s], axis=-1)
    n_dir = np.stack([-s, c], axis=-1)
    g = spec.param("scale") * (
        n_dir[..., :, None] * n_dir[..., None, :] - t_dir[..., :, None] * t_dir[..., None, :]
    )
    b = spec.param("boost")
    T = np.cosh(b) * t_dir + np.sinh(b) * n_dir
    if spec.param("reverse"):
        T = -T
    return g, T


def metric_field(spec, xy, widened=True):
    """Metric matrices at the points ``xy`` (shape ``(..., 2)``).

    With ``widened=False`` the unwidened metric is returned regardless of
    ``spec.alpha``.
    """
    xy = wrap_points(spec, xy)
    g, T = _base_fields(spec, xy)
    if widened and spec.alpha:
        g = widen_matrix(g, T, spec.alpha)
    return g


def orientation_field(spec, xy):
    xy = wrap_points(spec, xy)
    return _base_fields(spec, xy)[1]


def metric_at(spec, p):
    """The (possibly widened) metric at a single chart point."""
    p = np.asarray(p, dtype=float)
    if p.shape != (2,):
        raise ValueError("expected a single 2-D point")
    return metric_field(spec, p)


@dataclass(frozen=True)
class ConeSample:
    """The causal cone at one point.

    ``g`` is the unwidened metric, ``T`` the orientation and ``alpha`` the
    widening applied when testing vectors.
    """

    point: np.ndarray
    g: np.ndarray
    T: np.ndarray
    alpha: float = 0.0

    @property
    def widened_metric(self):
        return widen_matrix(self.g, self.T, self.alpha)

    @property
    def adapted_metric(self):
        return wick_matrix(self.g, self.T)


def cone_at(spec, p):
    p = wrap_points(spec, np.asarray(p, dtype=float))
    g, T = _base_fields(spec, p)
    return ConeSample(p, g, T, spec.alpha)


def is_future_causal(cone, v, slack=0.0):
    """True iff ``g_alpha(v, v) <= slack * h(v, v)`` and ``g(v, T) < 0``.

    ``h`` is the adapted metric of the unwidened cone, so the slack widens
    the cone outward by a fixed fraction of the Riemannian length.
    """
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("zero vector has no causal character")
    if slack < 0:
        raise ValueError("slack must be >= 0")
    lhs = quad(cone.widened_metric, v)
    rhs = slack * quad(cone.adapted_metric, v)
    return bool(lhs <= rhs and lower(cone.g, cone.T) @ v < 0)


def causal_test(g, T, alpha, v, slack):
    """Vectorised form of :func:`is_future_causal` over stacked samples."""
    ga = widen_matrix(g, T, alpha)
    h = wick_matrix(g, T)
    return (quad(ga, v) <= slack * quad(h, v)) & (quad(g, v, T) < 0)
