"""Tour of the simplex geometry: the square-root sphere map, geodesics,
and the three closed-form exponential maps.

Run:  python demos/01_geometry_tour.py
"""

import numpy as np

from simplexbo import (
    exp_map,
    fisher_distance,
    inv_sphere_map,
    log_map_alpha0,
    sample_uniform,
    sphere_map,
    tangent_project,
)
from simplexbo.simplex import fisher_norm

rng = np.random.default_rng(0)

# Two random mixtures of three components.
x = sample_uniform(rng, 2)
y = sample_uniform(rng, 2)
print("x =", np.round(x, 4))
print("y =", np.round(y, 4))

# The square-root map embeds the simplex into the unit-sphere orthant; the
# Fisher-Rao distance is twice the resulting great-circle arc.
s = sphere_map(x, radius=1)
print("\nsphere image of x:", np.round(s, 4), " |s| =", np.linalg.norm(s))
print("Fisher-Rao distance d(x, y) =", fisher_distance(x, y))
print("roundtrip through the sphere:", np.max(np.abs(inv_sphere_map(s, 1) - x)))

# The logarithmic map produces the tangent velocity whose geodesic reaches y.
eta = log_map_alpha0(x, y)
print("\nlog_x(y) has Fisher norm", fisher_norm(x, eta), "(equals the distance)")
print("exp_x(log_x(y)) error:", np.max(np.abs(exp_map(x, eta, 0) - y)))

# Walking the same tangent direction under the three connections: the
# mixture map (alpha=1) moves linearly and can hit the boundary, the
# Levi-Civita map (alpha=0) follows the sphere geodesic, and the
# exponential-connection map (alpha=-1) never leaves the interior.
v = tangent_project(x, rng.normal(size=3))
v = v / fisher_norm(x, v)
print("\nwalking 0.6 units along one tangent direction:")
for alpha in (1, 0, -1):
    try:
        out = exp_map(x, 0.6 * v, alpha)
        print(f"  alpha={alpha:+d}: {np.round(out, 4)}  min coord {out.min():.2e}")
    except Exception as exc:
        print(f"  alpha={alpha:+d}: {type(exc).__name__}: {exc}")

# Huge steps under alpha=-1 pile mass onto few coordinates but stay inside.
big = exp_map(x, 40.0 * v, -1)
print("\nalpha=-1 with a 40-unit step:", np.round(big, 6), " sum:", big.sum())
