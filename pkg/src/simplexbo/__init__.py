"""Geometry-aware Bayesian optimization on the probability simplex.

The package couples information-geometric kernels (spherical Matern/SE
series pulled back through the square-root map) with alpha-connection
acquisition optimizers, alongside constrained-Euclidean baselines, and a
benchmark harness that reproduces the regret protocol at desk scale.
"""

from .acquisition import (
    AcqSpec,
    OptimizerConfig,
    acq_value,
    acq_values,
    ei,
    lcb,
    optimize_acq_alpha,
    optimize_acq_projected,
)
from .bo import METHODS, MethodConfig, ObjectiveError, RunRecord, RunRow, run_bo, simple_regret
from .gp import Dataset, GpPosterior, condition, fit_hyperparams, log_marginal_likelihood, posterior_moments
from .harness import ExperimentPlan, plan_from_config, plot_results, run_plan
from .kernels import GramMatrix, KernelSpec, euclid_kernel, gram, simplex_kernel, sphere_kernel
from .objectives import ObjectiveSpec, external_objective, make_objective, projected_benchmark, tangent_basis
from .simplex import (
    DomainViolation,
    WeightMatrix,
    blend_weights,
    exp_map,
    fisher_distance,
    fisher_inner,
    inv_sphere_map,
    log_map_alpha0,
    natural_gradient,
    project_to_simplex,
    sample_uniform,
    sphere_map,
    tangent_project,
)
from .sphere import exp_map_sphere, geodesic_distance, log_map_sphere, orthant_retract, tangent_project_sphere

__version__ = "0.1.0"
