"""Batch front-end.

    python -m causet --config minkowski.json --out runs/mink --command all

Every artifact carries the SHA-256 of the config bytes.  Exit status: 0 on
success, 1 when a stage fails, 2 for an invalid command line or config; errors
are reported as a single JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .adapted import adapted_residuals
from .chains import build_chain_graph, chain_recurrent_set, window_matrix
from .config import COMMANDS, load_config
from .errors import ConfigError
from .export import read_csv, write_csv, write_json
from .grid import build_grid_model
from .reach import reach_interval
from .timefn import TimeField, edge_monotonicity, global_time_function
from .verify import audit_monotone, no_chain_certificate, sample_causal_curves

log = logging.getLogger("causet")

FLAG_RECURRENT = 1
FLAG_UNDECIDED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"command line: {message}")


def _parser():
    p = _Parser(prog="causet", description="Discrete causal structure and time functions.")
    p.add_argument("--config", required=True, help="JSON config path or bundled config name")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--command", required=True, help="one of " + ", ".join(COMMANDS))
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--threads", type=int, default=0, help="worker threads (0 = auto)")
    return p


class Run:
    """Shared state of one invocation: config, model and pipeline results."""

    def __init__(self, cfg, out, command):
        self.cfg = cfg
        self.out = Path(out)
        self.prov = {"config_sha256": cfg.sha256, "command": command, "seed": cfg.seed}
        self._model = None
        self._pipeline = None

    @property
    def model(self):
        if self._model is None:
            c = self.cfg
            self._model = build_grid_model(c.spec, c.resolution, c.r_step, c.eta, c.L_cap)
        return self._model

    @property
    def pipeline(self):
        if self._pipeline is None:
            self._pipeline = global_time_function(self.cfg.spec, self.cfg.pipeline_params(), model=self.model)
        return self._pipeline

    def path(self, name):
        return self.out / name

    # stages -------------------------------------------------------------

    def stage_model(self):
        m = self.model
        res = adapted_residuals(m)
        eig = np.linalg.eigvalsh(m.h)
        write_json(self.path("model_report.json"), {
            "spacetime": m.spec.to_dict(),
            "shape": list(m.shape),
            "spacing": m.spacing,
            "r_step": m.r_step,
            "eta": m.eta,
            "L_cap": m.L_cap,
            "n_nodes": m.n_nodes,
            "n_step_edges": int(m.step.nnz),
            "offsets": m.offsets,
            "exit_nodes": int(m.exits.sum()),
            "adapted_residual_max": float(res.max()),
            "h_min_eigenvalue": float(eig.min()),
            "cyclic_components": int(m.order_cyclic.sum()),
        }, self.prov)
        rows = ((k, *m.points[k], *m.h[k][[0, 0, 1], [0, 1, 1]], res[k], m.exits[k]) for k in range(m.n_nodes))
        write_csv(self.path("nodes.csv"), ["node", "x", "y", "h_xx", "h_xy", "h_yy", "adapted_residual", "exit"],
                  rows, self.prov)

    def stage_reach(self):
        m = self.model
        sources = self.cfg.reach_sources or [tuple(np.mean(m.spec.chart, axis=1))]
        summary = []
        for i, p in enumerate(sources):
            s = m.node_at(p)
            r = reach_interval(m, s)
            rows = ((k, *m.points[k], r.lmin[k], r.lmax[k], r.boundary_exit[k])
                    for k in np.flatnonzero(r.reached))
            write_csv(self.path(f"reach_{i}.csv"), ["node", "x", "y", "lmin", "lmax", "boundary_exit"],
                      rows, self.prov)
            summary.append({"source_point": list(p), "source_node": s, "reached": int(r.reached.sum()),
                            "boundary_exit": int(r.boundary_exit.sum())})
        write_json(self.path("reach_report.json"), {"sources": summary}, self.prov)

    def stage_chains(self):
        m = self.model
        masks, stages, windows = [], [], {}
        first = None
        for eps, T in self.cfg.schedule:
            e = m.spacing if eps is None else eps
            T_cap = self.cfg.T_cap if self.cfg.T_cap is not None else 2 * T
            key = (T, T_cap)
            if key not in windows:
                windows = {key: window_matrix(m, T, T_cap)}
            graph = build_chain_graph(m, e, T, T_cap, window=windows[key])
            rep = chain_recurrent_set(graph)
            if first is None:
                first = graph
            masks.append(rep.mask)
            stages.append({"eps": e, "T": T, "T_cap": T_cap, "edges": graph.n_edges,
                           "recurrent": int(rep.mask.sum()),
                           "scc_count": int(np.unique(rep.labels).size)})
        inter = np.logical_and.reduce(masks)
        write_csv(self.path("chain_edges.csv"), ["source", "target"], first.edges(), self.prov)
        header = ["node", "x", "y"] + [f"stage_{i}" for i in range(len(masks))] + ["recurrent"]
        rows = ((k, *m.points[k], *(mk[k] for mk in masks), inter[k]) for k in range(m.n_nodes))
        write_csv(self.path("recurrence.csv"), header, rows, self.prov)
        write_json(self.path("chains_report.json"), {
            "stages": stages, "recurrent": int(inter.sum()), "all_recurrent": bool(inter.all()),
        }, self.prov)

    def stage_attractors(self):
        m = self.model
        _, rep = self.pipeline
        recs = rep["records"]
        write_json(self.path("attractors.json"), {
            "n_nodes": m.n_nodes,
            "records": [r.to_dict() for r in recs],
            "basin_union_note": "B(A) is approximated by the union of basins over the emitted records",
        }, self.prov)

        def bits(masks):
            return format(sum(1 << i for i, mk in enumerate(masks) if mk), "x")

        rows = ((k, *m.points[k], bits(r.U[k] for r in recs), bits(r.A[k] for r in recs),
                 bits(r.B[k] for r in recs)) for k in range(m.n_nodes))
        write_csv(self.path("attractor_nodes.csv"), ["node", "x", "y", "U_bits", "A_bits", "B_bits"],
                  rows, self.prov)

    def stage_timefn(self):
        m = self.model
        tau, rep = self.pipeline
        flags = rep["R"] * FLAG_RECURRENT + rep["undecided"] * FLAG_UNDECIDED
        rows = ((k, *m.points[k], tau.values[k], flags[k]) for k in range(m.n_nodes))
        write_csv(self.path("tau.csv"), ["node", "x", "y", "value", "flags"], rows, self.prov)
        grid = m.grid(tau.values)
        write_csv(self.path("tau_grid.csv"), [f"j{j}" for j in range(m.shape[1])], grid, self.prov)
        write_json(self.path("timefn_report.json"), {
            "records": [{"source": r.source, "t0": r.t0, "A": int(r.A.sum()), "B": int(r.B.sum()),
                         "undecided": int(r.undecided.sum()),
                         "boundary_contaminated": r.boundary_contaminated} for r in rep["records"]],
            "recurrent": int(rep["R"].sum()),
            "undecided": rep["undecided_count"],
            "empty_future_nodes": rep["empty_future_count"],
            "edges": rep["edges"],
            "ladder": rep["ladder"],
            "chain_graph": rep["chain_graph"],
            "time_function_impossible": rep["time_function_impossible"],
            "note": rep["note"],
            "flags": {"recurrent": FLAG_RECURRENT, "undecided": FLAG_UNDECIDED},
        }, self.prov)

    def stage_verify(self):
        m = self.model
        path = self.path("tau.csv")
        if not path.is_file():
            raise FileNotFoundError("tau.csv not found; run the timefn command first")
        prov, header, rows = read_csv(path)
        if prov.get("config_sha256") != self.cfg.sha256:
            raise ValueError("tau.csv was produced from a different config")
        vals = np.array([float(r[header.index("value")]) for r in rows])
        flags = np.array([int(r[header.index("flags")]) for r in rows])
        if vals.size != m.n_nodes:
            raise ValueError("tau.csv does not match the model")
        tau = TimeField(m, vals, "tau_combined")
        skip = flags != 0
        curves = sample_causal_curves(m, self.cfg.curves, self.cfg.curve_length, self.cfg.seed)
        audit = audit_monotone(tau, curves, skip)
        edges = edge_monotonicity(m, tau, exclude=skip)
        edges.pop("non_strict_sources")
        if (flags & FLAG_RECURRENT).all():
            cert = {"verdict": "impossible", "alpha": 0.0, "reason": "every node is chain recurrent"}
        else:
            c = no_chain_certificate(m, tau, self.cfg.T_certificate)
            cert = {"verdict": c["verdict"], "alpha": c["alpha"], "pair": c["pair"]}
        bad = [i for i, pc in enumerate(audit["per_curve"]) if pc["violations"]]
        write_json(self.path("audit_report.json"), {
            "curves": {k: v for k, v in audit.items() if k != "per_curve"},
            "violating_curves": bad,
            "edges": edges,
            "no_chain_certificate": cert,
        }, self.prov)
        rows = ((i, j, *curves[i].points[j]) for i in bad for j in range(len(curves[i].points)))
        write_csv(self.path("violating_curves.csv"), ["curve", "point", "x", "y"], rows, self.prov)


STAGES = {
    "model": ["model"],
    "reach": ["reach"],
    "chains": ["chains"],
    "attractors": ["attractors"],
    "timefn": ["timefn"],
    "verify": ["verify"],
    "all": ["model", "reach", "chains", "attractors", "timefn", "verify"],
}


def _fail(kind, message, code, stage=None):
    rec = {"error": kind, "message": str(message).replace("\n", " ")}
    if stage:
        rec["stage"] = stage
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None):
    logging.basicConfig(level=os.environ.get("CAUSET_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = _parser().parse_args(argv)
        if args.command not in COMMANDS:
            raise ConfigError(f"unknown command {args.command!r}")
        if args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        cfg = load_config(args.config, args.seed)
    except ConfigError as exc:
        return _fail("config", exc, 2)
    if args.threads:
        import numba

        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    run = Run(cfg, args.out, args.command)
    run.out.mkdir(parents=True, exist_ok=True)
    for stage in STAGES[args.command]:
        log.info("stage %s", stage)
        try:
            getattr(run, f"stage_{stage}")()
        except Exception as exc:  # stage failures map to exit status 1
            log.debug("stage %s failed", stage, exc_info=True)
            return _fail("stage", f"{type(exc).__name__}: {exc}", 1, stage)
    return 0


if __name__ == "__main__":
    sys.exit(main())
