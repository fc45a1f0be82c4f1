"""Gaussian-process regression on the simplex with fitted hyperparameters.

Run:  python demos/03_gp_regression.py
"""

import numpy as np

from simplexbo import Dataset, KernelSpec, condition, fit_hyperparams, posterior_moments
from simplexbo.simplex import fisher_distance, sample_uniform

rng = np.random.default_rng(2)
d = 2

# ground truth: a smooth bump centered at a planted mixture
target = np.array([0.55, 0.3, 0.15])
truth = lambda x: np.exp(-2.0 * fisher_distance(x, target) ** 2)

X = np.array([sample_uniform(rng, d) for _ in range(25)])
y = np.array([truth(x) + 0.01 * rng.normal() for x in X])

template = KernelSpec(family="spherical_se", kappa=1.0, sigma2=1.0, dim=d)
data = Dataset(X, y, noise=1e-2, domain="simplex")
spec, noise = fit_hyperparams(data, template)
print(f"fitted: kappa={spec.kappa:.3f}  sigma2={spec.sigma2:.3f}  noise={noise:.2e}")

post = condition(Dataset(X, y, noise, "simplex"), spec)
err = []
for _ in range(300):
    x = sample_uniform(rng, d)
    mean, var = posterior_moments(post, x)
    err.append(abs(mean - truth(x)))
err = np.array(err)
print(f"posterior mean error: median {np.median(err):.4f}, p90 {np.quantile(err, 0.9):.4f}")

mean_at_target, var_at_target = posterior_moments(post, target)
print(f"at the bump: mean {mean_at_target:.3f} (truth 1.0), sd {np.sqrt(var_at_target):.3f}")
