"""Spherical series kernels versus Euclidean kernels on the simplex.

Plots kernel profiles as a function of the Fisher-Rao distance and checks
positive-definiteness of the resulting Gram matrices.

Run:  python demos/02_kernels_on_the_simplex.py   (writes kernels.svg)
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from simplexbo import KernelSpec, gram, sample_uniform, simplex_kernel
from simplexbo.kernels import euclid_kernel
from simplexbo.simplex import exp_map, fisher_distance, fisher_norm, tangent_project

rng = np.random.default_rng(1)
d = 2
center = np.full(d + 1, 1.0 / (d + 1))

se = KernelSpec(family="spherical_se", kappa=0.4, sigma2=1.0, dim=d)
matern = KernelSpec(family="spherical_matern", kappa=0.4, sigma2=1.0, dim=d, nu=2.5)
eucl = KernelSpec(family="euclid_se", kappa=0.4, sigma2=1.0, dim=d)

# walk a geodesic away from the center and record kernel profiles
v = tangent_project(center, np.array([1.0, -0.5, -0.5]))
v = v / fisher_norm(center, v)
arcs = np.linspace(0.0, 1.8, 60)
rows = []
for t in arcs:
    x = exp_map(center, t * v, 0)
    rows.append(
        (
            fisher_distance(center, x),
            simplex_kernel(center, x, se),
            simplex_kernel(center, x, matern),
            euclid_kernel(center, x, eucl),
        )
    )
rows = np.array(rows)

fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(rows[:, 0], rows[:, 1], label="spherical SE (pullback)")
ax.plot(rows[:, 0], rows[:, 2], label="spherical Matern 5/2 (pullback)")
ax.plot(rows[:, 0], rows[:, 3], "--", label="Euclidean SE on raw coords")
ax.set_xlabel("Fisher-Rao distance from the center")
ax.set_ylabel("kernel value")
ax.legend()
fig.tight_layout()
fig.savefig("kernels.svg")
print("wrote kernels.svg")

# Gram-matrix health for a random design
pts = np.array([sample_uniform(rng, d) for _ in range(40)])
for name, spec in (("SE", se), ("Matern", matern)):
    g = gram(pts, spec, domain="simplex")
    eig = np.linalg.eigvalsh(g.values)
    print(f"{name}: min eig {eig.min():.2e}, max eig {eig.max():.2e}, jitter {g.jitter:.1e}")
