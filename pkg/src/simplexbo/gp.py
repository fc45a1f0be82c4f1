"""Gaussian-process regression generic over the kernel module.

Posterior moments and log marginal likelihood are computed through the
Cholesky factor of ``K(D, D) + noise * I`` (plus an escalating jitter when
the factorization is borderline).  Hyperparameters (lengthscale, signal
variance, observation noise) are fit by multi-start Nelder-Mead on the log
marginal likelihood in log-space, within the bounds fixed by the kernels
module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize
from scipy.stats import qmc

from .kernels import (
    GramFactorizationError,
    KAPPA_BOUNDS,
    KernelSpec,
    NOISE_BOUNDS,
    PrecomputedPairs,
    SIGMA2_BOUNDS,
    chol_with_jitter,
    kernel_diag,
    kernel_matrix,
)

__all__ = [
    "Dataset",
    "GpPosterior",
    "VARIANCE_FLOOR",
    "condition",
    "fit_hyperparams",
    "log_marginal_likelihood",
    "posterior_moments",
    "posterior_moments_batch",
]

# Numerically-negative posterior variances are floored here before any
# square root taken for acquisition values.
VARIANCE_FLOOR = 1e-12

_FIT_STARTS = 8
_NM_OPTIONS = {"maxfev": 120, "xatol": 0.02, "fatol": 1e-4}


@dataclass(frozen=True)
class Dataset:
    """Observed inputs/outputs plus the observation-noise variance.

    ``inputs`` is an (N, m) stack of row vectors on ``domain`` ('simplex',
    'sphere' or 'ambient'); ``y`` the N observed values.
    """

    inputs: np.ndarray
    y: np.ndarray
    noise: float
    domain: str

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        if X.size == 0:
            X = X.reshape(0, max(X.shape[-1] if X.ndim else 0, 0))
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} inputs vs {y.shape[0]} outputs")
        if self.noise < 0.0:
            raise ValueError("noise variance must be nonnegative")
        if self.domain not in ("simplex", "sphere", "ambient"):
            raise ValueError(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class GpPosterior:
    """Dataset conditioned under a kernel; caches the Cholesky factor."""

    data: Dataset
    spec: KernelSpec
    prior_mean: float
    chol: np.ndarray | None
    weights: np.ndarray | None
    jitter: float


def condition(data: Dataset, spec: KernelSpec, prior_mean: float | None = None) -> GpPosterior:
    """Build the posterior state for a dataset (empty datasets allowed)."""
    if prior_mean is None:
        prior_mean = float(data.y.mean()) if len(data) else 0.0
    if len(data) == 0:
        return GpPosterior(data, spec, prior_mean, None, None, 0.0)
    K = kernel_matrix(data.inputs, data.inputs, spec, data.domain)
    K = 0.5 * (K + K.T)
    sigma = K + data.noise * np.eye(len(data))
    L, jitter = chol_with_jitter(sigma, spec.sigma2)
    weights = cho_solve((L, True), data.y - prior_mean)
    return GpPosterior(data, spec, prior_mean, L, weights, jitter)


def posterior_moments(post: GpPosterior, x: np.ndarray) -> tuple[float, float]:
    """Posterior mean and variance at one point (clamped at zero)."""
    means, variances = posterior_moments_batch(post, np.asarray(x, dtype=float)[None, :])
    return float(means[0]), float(variances[0])


def posterior_moments_batch(post: GpPosterior, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized posterior moments over a stack of row vectors."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    prior_var = kernel_diag(X, post.spec, post.data.domain)
    if len(post.data) == 0:
        return np.full(X.shape[0], post.prior_mean), prior_var
    k_star = kernel_matrix(X, post.data.inputs, post.spec, post.data.domain)
    means = post.prior_mean + k_star @ post.weights
    V = solve_triangular(post.chol, k_star.T, lower=True)
    variances = np.maximum(prior_var - np.sum(V * V, axis=0), 0.0)
    if not (np.all(np.isfinite(means)) and np.all(np.isfinite(variances))):
        raise FloatingPointError("non-finite posterior moments")
    return means, variances


def log_marginal_likelihood(data: Dataset, spec: KernelSpec, prior_mean: float) -> float:
    """Gaussian log evidence of the data under the kernel, via Cholesky."""
    n = len(data)
    if n < 1:
        raise ValueError("log marginal likelihood requires at least one point")
    K = kernel_matrix(data.inputs, data.inputs, spec, data.domain)
    K = 0.5 * (K + K.T)
    L, _ = chol_with_jitter(K + data.noise * np.eye(n), spec.sigma2)
    resid = data.y - prior_mean
    alpha = cho_solve((L, True), resid)
    return float(
        -0.5 * resid @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * math.log(2.0 * math.pi)
    )


def _log_bounds() -> np.ndarray:
    return np.log(np.array([KAPPA_BOUNDS, SIGMA2_BOUNDS, NOISE_BOUNDS]))


def fit_hyperparams(
    data: Dataset, spec_template: KernelSpec, seed: int = 0
) -> tuple[KernelSpec, float]:
    """Maximize the log marginal likelihood over (kappa, sigma2, noise).

    Multi-start Nelder-Mead in log space: the template hyperparameters plus
    seven Latin-hypercube points spread over the bound box.  Returns the best
    kernel spec and the fitted noise variance; deterministic given ``seed``.
    """
    n = len(data)
    if n < 2:
        raise ValueError("hyperparameter fitting requires at least two points")
    pairs = PrecomputedPairs(data.inputs, spec_template, data.domain)
    prior_mean = float(data.y.mean())
    resid = data.y - prior_mean
    eye = np.eye(n)
    const = 0.5 * n * math.log(2.0 * math.pi)

    def neg_lml(theta: np.ndarray) -> float:
        kappa, sigma2, noise = np.exp(theta)
        try:
            K = pairs.gram_values(kappa, sigma2)
            L, _ = chol_with_jitter(K + noise * eye, sigma2)
        except (GramFactorizationError, FloatingPointError):
            return math.inf
        alpha = cho_solve((L, True), resid)
        value = 0.5 * resid @ alpha + np.sum(np.log(np.diag(L))) + const
        return float(value) if np.isfinite(value) else math.inf

    bounds = _log_bounds()
    template_theta = np.log(
        np.clip(
            [spec_template.kappa, spec_template.sigma2, data.noise],
            np.exp(bounds[:, 0]),
            np.exp(bounds[:, 1]),
        )
    )
    sampler = qmc.LatinHypercube(d=3, seed=seed)
    lhs = bounds[:, 0] + sampler.random(_FIT_STARTS - 1) * (bounds[:, 1] - bounds[:, 0])
    starts = np.vstack([template_theta, lhs])

    best_theta, best_val = template_theta, neg_lml(template_theta)
    for x0 in starts:
        res = minimize(
            neg_lml,
            x0,
            method="Nelder-Mead",
            bounds=list(zip(bounds[:, 0], bounds[:, 1])),
            options=_NM_OPTIONS,
        )
        if np.isfinite(res.fun) and res.fun < best_val:
            best_theta, best_val = res.x, float(res.fun)
    if not np.isfinite(best_val):
        raise RuntimeError("every hyperparameter start produced a non-finite likelihood")
    kappa, sigma2, noise = np.exp(best_theta)
    return spec_template.with_params(kappa=float(kappa), sigma2=float(sigma2)), float(noise)
