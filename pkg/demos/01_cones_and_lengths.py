"""
Cones, adapted lengths and causal futures
=========================================

Builds the flat and the tilted-cylinder models, checks the Wick-rotated
Riemannian metric node by node, and prints the future of a point as a
character map (rows are the time coordinate x, columns the space
coordinate y).
"""
import numpy as np

from causet.adapted import adapted_residuals, h_length
from causet.grid import build_grid_model
from causet.reach import reach_interval
from causet.spacetime import builtin
from causet.verify import check_semicontinuity_constant, zigzag_family


def show(model, mask, mark="#"):
    for row in model.grid(mask):
        print("  " + "".join(mark if v else "." for v in row))


flat = build_grid_model(builtin("minkowski"), 32)
cyl = build_grid_model(builtin("cylinder-tilt"), 32)

# the adapted metric agrees with g in an orthonormal frame up to the sign flip
for name, m in (("minkowski", flat), ("cylinder-tilt", cyl)):
    print(f"{name}: {m.n_nodes} nodes, spacing {m.spacing:.4f}, "
          f"max adapted residual {adapted_residuals(m).max():.1e}")

# a straight timelike segment has h-length equal to its coordinate length
seg = np.array([[0.2, 0.0], [1.2, 0.0]])
print(f"\nh-length of a unit time segment: {h_length(flat.field, seg):.6f}")

# null zigzags converging to that segment are longer by up to sqrt(2)
limit, members = zigzag_family((0.5, 0.0), 1.0, [0.0, 0.5, 1.0], [4, 8, 16])
rep = check_semicontinuity_constant(flat, limit, members)
print("length ratios limit / zigzag:", np.round(rep["ratios"], 4), f"(1/sqrt 2 = {1 / np.sqrt(2):.4f})")

# future of a point between h-lengths 0.3 and 0.6
p = flat.node_at((0.5, 0.0))
r = reach_interval(flat, p)
print("\nMinkowski J+_{0.3,0.6} of (0.5, 0):")
show(flat, r.mask(0.3, 0.6))

# on the cylinder the circle x = 0 is a closed null curve; futures wrap around it
q = cyl.node_at((-0.4, 1.0))
print("\ncylinder-tilt future of (-0.4, 1.0) up to h-length 1.5:")
show(cyl, reach_interval(cyl, q).mask(0.0, 1.5))
