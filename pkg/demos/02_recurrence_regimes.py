"""
Chain recurrence in three regimes
=================================

An (eps, T)-chain strings together causal segments of h-length at least T
with jumps of size at most eps.  Nodes that return to themselves along such
chains form the chain recurrent set R.  Flat space has none, the torus is
recurrent everywhere, and the tilted cylinder traps R on its null circle.
"""
import numpy as np

from causet.chains import approx_R, build_chain_graph, chain_recurrent_set
from causet.grid import build_grid_model
from causet.spacetime import builtin

for metric in ("minkowski", "torus", "cylinder-tilt"):
    m = build_grid_model(builtin(metric), 32)
    g = build_chain_graph(m, m.spacing, 0.5)
    R = chain_recurrent_set(g).mask
    print(f"{metric:14s} chain edges {g.n_edges:8d}   |R| = {R.sum():4d} of {m.n_nodes}")

# shrinking eps can only remove recurrent nodes; on the cylinder R settles
# within one cell of the circle x = 0
m = build_grid_model(builtin("cylinder-tilt"), 32)
s = m.spacing
rep = approx_R(m, [(3 * s, 0.5), (2 * s, 0.5), (s, 0.5)])
x = m.points[:, 0]
for (eps, _), stage in zip(rep.schedule, rep.stages):
    print(f"eps = {eps / s:.0f} cells: |R| = {stage.sum():4d}, max |x| on R = {np.abs(x[stage]).max():.4f}")

print("\ncylinder-tilt R (rows are x, the circle sits at row 16):")
for row in m.grid(rep.mask):
    print("  " + "".join("R" if v else "." for v in row))
