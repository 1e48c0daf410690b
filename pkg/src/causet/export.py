"""Deterministic CSV/JSON writers with provenance headers."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def fmt(v):
    """Round-trip exact text for numbers (17 significant digits for floats)."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def provenance_line(prov):
    return "# provenance: " + " ".join(f"{k}={prov[k]}" for k in sorted(prov))


def write_csv(path, header, rows, prov):
    """Write a CSV with a provenance comment line, a header and LF line endings."""
    lines = [provenance_line(prov), ",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def _plain(o):
    if isinstance(o, dict):
        return {str(k): _plain(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_plain(v) for v in o]
    if isinstance(o, np.ndarray):
        return _plain(o.tolist())
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        o = float(o)
    if isinstance(o, float) and not np.isfinite(o):
        return None if np.isnan(o) else ("inf" if o > 0 else "-inf")
    return o


def write_json(path, obj, prov):
    body = dict(_plain(obj))
    body["provenance"] = dict(prov)
    text = json.dumps(body, sort_keys=True, indent=2, allow_nan=False)
    Path(path).write_bytes((text + "\n").encode("utf-8"))


def read_csv(path):
    """Return ``(provenance dict, header, rows of strings)``."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    prov = {}
    if lines and lines[0].startswith("# provenance:"):
        for item in lines[0][len("# provenance:"):].split():
            k, _, v = item.partition("=")
            prov[k] = v
        lines = lines[1:]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:] if ln]
    return prov, header, rows
