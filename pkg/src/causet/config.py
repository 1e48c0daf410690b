"""Run configuration: JSON schema, validation and hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .spacetime import SpacetimeSpec
from .timefn import PipelineParams

SCHEMA_VERSION = 1
COMMANDS = ("model", "reach", "chains", "attractors", "timefn", "verify", "all")

_SECTIONS = {
    "schema_version", "name", "spacetime", "grid", "chains", "attractors", "reach", "verify", "seed",
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration.

    ``schedule`` holds ``(eps, T)`` stages with ``eps = None`` meaning one
    lattice spacing; the first stage drives the pipeline.
    """

    spec: SpacetimeSpec
    resolution: tuple
    r_step: float | None
    eta: float | None
    L_cap: float
    schedule: list
    T_cap: float | None
    alpha: float
    t0: float
    max_records: int
    reach_sources: list
    curves: int
    curve_length: float
    T_certificate: float
    seed: int
    sha256: str
    raw: dict = field(default_factory=dict, compare=False)

    def pipeline_params(self):
        eps, T = self.schedule[0]
        return PipelineParams(
            resolution=self.resolution, r_step=self.r_step, eta=self.eta, L_cap=self.L_cap,
            eps=eps, T=T, T_cap=self.T_cap, alpha=self.alpha, t0_widened=self.t0,
            max_records=self.max_records,
        )


def bundled_configs():
    """Names of the configurations shipped with the package."""
    root = resources.files("causet") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_config_bytes(path):
    """Raw bytes of ``path``, falling back to a bundled config of that name."""
    p = Path(path)
    if p.is_file():
        return p.read_bytes()
    name = p.name[:-5] if p.name.endswith(".json") else p.name
    if name in bundled_configs() and p.parent == Path("."):
        return (resources.files("causet") / "configs" / f"{name}.json").read_bytes()
    raise ConfigError(f"config file not found: {path}")


def _num(d, key, default, lo=None, hi=None, strict_lo=False, allow_none=False):
    v = d.get(key, default)
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number")
    v = float(v)
    if lo is not None and (v <= lo if strict_lo else v < lo):
        raise ConfigError(f"{key}={v!r} out of range")
    if hi is not None and v > hi:
        raise ConfigError(f"{key}={v!r} out of range")
    return v


def _section(d, key):
    s = d.get(key, {})
    if not isinstance(s, dict):
        raise ConfigError(f"section {key!r} must be an object")
    return s


def parse_config(data, seed=None):
    """Validate raw config bytes; ``seed`` overrides the configured seed."""
    sha = hashlib.sha256(data).hexdigest()
    try:
        d = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    unknown = set(d) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")

    st = _section(d, "spacetime")
    if "metric" not in st:
        raise ConfigError("spacetime.metric is required")
    try:
        spec = SpacetimeSpec.from_dict(st)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid spacetime: {exc}") from None

    g = _section(d, "grid")
    res = g.get("resolution", 64)
    res = (res, res) if isinstance(res, int) and not isinstance(res, bool) else res
    if not (isinstance(res, (list, tuple)) and len(res) == 2
            and all(isinstance(r, int) and not isinstance(r, bool) and r >= 8 for r in res)):
        raise ConfigError("grid.resolution must be an integer >= 8 or a pair of them")
    L_cap = _num(g, "L_cap", 3.0, 0, strict_lo=True)

    c = _section(d, "chains")
    sched = c.get("schedule", [[None, 0.5]])
    if not isinstance(sched, list) or not sched:
        raise ConfigError("chains.schedule must be a non-empty list of [eps, T]")
    schedule = []
    for stage in sched:
        if not (isinstance(stage, list) and len(stage) == 2):
            raise ConfigError("each schedule stage must be [eps, T]")
        eps = _num({"eps": stage[0]}, "eps", None, 0, strict_lo=True, allow_none=True)
        T = _num({"T": stage[1]}, "T", None, 0, strict_lo=True)
        schedule.append((eps, T))
    for (e0, t0), (e1, t1) in zip(schedule, schedule[1:]):
        if (e0 or 0.0) < (e1 or 0.0) or (e0 is None and e1 is not None) or t1 < t0:
            raise ConfigError("chains.schedule needs non-increasing eps and non-decreasing T")
    T_cap = _num(c, "T_cap", None, 0, strict_lo=True, allow_none=True)
    for _, T in schedule:
        if (T_cap if T_cap is not None else 2 * T) > L_cap or (T_cap is not None and T_cap < T):
            raise ConfigError("chain window [T, T_cap] must fit under grid.L_cap")

    a = _section(d, "attractors")
    alpha = _num(a, "alpha", 0.5, 0)
    t0 = _num(a, "t0", 1.0, 0, L_cap, strict_lo=True)
    max_records = int(_num(a, "max_records", 24, 1))

    r = _section(d, "reach")
    sources = r.get("sources", [])
    if not (isinstance(sources, list) and all(
            isinstance(p, list) and len(p) == 2 and all(isinstance(x, (int, float)) for x in p) for p in sources)):
        raise ConfigError("reach.sources must be a list of [x, y] points")

    v = _section(d, "verify")
    seed_v = d.get("seed", 0) if seed is None else seed
    if isinstance(seed_v, bool) or not isinstance(seed_v, int) or seed_v < 0 or seed_v >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")

    return RunConfig(
        spec=spec,
        resolution=tuple(res),
        r_step=_num(g, "r_step", None, 0, strict_lo=True, allow_none=True),
        eta=_num(g, "eta", None, 0, allow_none=True),
        L_cap=L_cap,
        schedule=schedule,
        T_cap=T_cap,
        alpha=alpha,
        t0=t0,
        max_records=max_records,
        reach_sources=[tuple(float(x) for x in p) for p in sources],
        curves=int(_num(v, "curves", 1000, 1)),
        curve_length=_num(v, "length", 1.0, 0, L_cap, strict_lo=True),
        T_certificate=_num(v, "T_certificate", 0.5, 0, L_cap / 2, strict_lo=True),
        seed=int(seed_v),
        sha256=sha,
        raw=d,
    )


def load_config(path, seed=None):
    return parse_config(read_config_bytes(path), seed)
