"""Acquisition functions and their maximization on constrained domains.

Two maximization routes are provided:

* Riemannian optimizers driven by the alpha-connection geometry — gradient
  ascent with Armijo backtracking or a Steihaug trust region — running on
  the simplex interior (alpha = -1, exponential-connection steps) or on the
  positive sphere orthant (alpha = 0, great-circle steps plus the orthant
  retraction).
* Projected Euclidean ascent in ambient coordinates for the
  constrained-Euclidean baselines, with Euclidean simplex projection or the
  orthant retraction as the feasibility map.

Gradients are central finite differences of the acquisition in ambient
coordinates, converted to Riemannian gradients afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .gp import GpPosterior, VARIANCE_FLOOR, posterior_moments_batch
from .simplex import (
    DomainViolation,
    alpha_hessian_action,
    ensure_interior,
    exp_map,
    natural_gradient,
    sample_uniform,
)
from .sphere import exp_map_sphere, orthant_retract, tangent_project_sphere

__all__ = [
    "AcqSpec",
    "OptimizerConfig",
    "acq_value",
    "acq_values",
    "ei",
    "lcb",
    "maximize_projected",
    "maximize_riemannian",
    "optimize_acq_alpha",
    "optimize_acq_projected",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class AcqSpec:
    """Acquisition choice: 'ei' or 'lcb' (maximization form, beta > 0)."""

    kind: str = "ei"
    beta: float = 2.0

    def __post_init__(self):
        if self.kind not in ("ei", "lcb"):
            raise ValueError(f"unknown acquisition {self.kind!r}")
        if not self.beta > 0.0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 5
    max_iters: int = 100
    method: str = "riemannian_trust_region"
    gradient_mode: str = "finite_difference"
    grad_tol: float = 1e-6
    fd_step: float = 1e-6
    tr_initial_radius: float = 0.1
    tr_max_radius: float = 1.0
    tr_rho_threshold: float = 0.1
    armijo_c1: float = 1e-4
    armijo_backtrack: float = 0.5
    armijo_max_backtracks: int = 30
    max_halvings: int = 20

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")
        if self.method not in ("riemannian_gd_armijo", "riemannian_trust_region"):
            raise ValueError(f"unknown optimizer method {self.method!r}")
        if self.gradient_mode != "finite_difference":
            raise ValueError("only finite-difference gradients are implemented")
        if not (0.0 < self.tr_rho_threshold < 1.0):
            raise ValueError("trust-region acceptance threshold must be in (0, 1)")
        if not (0.0 < self.armijo_backtrack < 1.0):
            raise ValueError("backtrack factor must be in (0, 1)")
        if min(self.grad_tol, self.fd_step, self.tr_initial_radius,
               self.tr_max_radius, self.armijo_c1) <= 0.0:
            raise ValueError("tolerances and radii must be positive")


def ei(mean: float, sd: float, best: float) -> float:
    """Expected improvement over ``best`` for a maximization problem."""
    if sd < 0.0:
        raise ValueError("standard deviation must be nonnegative")
    if sd == 0.0:
        return max(mean - best, 0.0)
    z = (mean - best) / sd
    return float((mean - best) * ndtr(z) + sd * math.exp(-0.5 * z * z) / _SQRT_2PI)


def lcb(mean: float, sd: float, beta: float) -> float:
    """Confidence-bound score ``mean + beta * sd`` (maximization form)."""
    if sd < 0.0:
        raise ValueError("standard deviation must be nonnegative")
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    return float(mean + beta * sd)


def acq_values(post: GpPosterior, acq: AcqSpec, X: np.ndarray) -> np.ndarray:
    """Vectorized acquisition over a stack of row vectors."""
    means, variances = posterior_moments_batch(post, X)
    sd = np.sqrt(np.maximum(variances, VARIANCE_FLOOR))
    if acq.kind == "lcb":
        return means + acq.beta * sd
    if len(post.data) == 0:
        raise ValueError("expected improvement needs at least one observation")
    best = float(np.max(post.data.y))
    z = (means - best) / sd
    return (means - best) * ndtr(z) + sd * np.exp(-0.5 * z * z) / _SQRT_2PI


def acq_value(post: GpPosterior, acq: AcqSpec, x: np.ndarray) -> float:
    return float(acq_values(post, acq, np.asarray(x, dtype=float)[None, :])[0])


# ---------------------------------------------------------------------------
# geometry adapters


class _SimplexAlphaGeometry:
    """alpha = -1 route: Fisher metric, exponential-connection steps."""

    fd_nonneg = True

    def sanitize(self, x):
        return ensure_interior(np.asarray(x, dtype=float))

    def rgrad(self, x, ambient_grad):
        return natural_gradient(x, ambient_grad)

    def inner(self, x, u, v):
        return float(np.sum(x * u * v))

    def retract(self, x, eta):
        # iterates stay clamped to the eps-interior: the map is singular at
        # the boundary and large steps can underflow coordinates to zero
        return ensure_interior(exp_map(x, eta, -1))

    def hess_action(self, x, eta, grad_field):
        return alpha_hessian_action(x, grad_field, eta, -1)


class _SphereOrthantGeometry:
    """alpha = 0 route: great-circle steps retracted to the orthant."""

    fd_nonneg = False

    def sanitize(self, s):
        return orthant_retract(np.asarray(s, dtype=float))

    def rgrad(self, s, ambient_grad):
        return tangent_project_sphere(s, ambient_grad)

    def inner(self, s, u, v):
        return float(np.dot(u, v))

    def retract(self, s, w):
        return orthant_retract(exp_map_sphere(s, w))

    def hess_action(self, s, w, grad_field, h_scale=1e-5):
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            return np.zeros_like(s)
        unit = w / nrm
        h = h_scale * max(1.0, nrm)
        g_plus = grad_field(exp_map_sphere(s, h * unit))
        g_minus = grad_field(exp_map_sphere(s, -h * unit))
        return tangent_project_sphere(s, (g_plus - g_minus) * (nrm / (2.0 * h)))


_GEOMETRIES = {-1: _SimplexAlphaGeometry(), 0: _SphereOrthantGeometry()}


def _fd_gradient(f_batch, x: np.ndarray, rel: float, nonneg: bool) -> np.ndarray:
    """Central-difference ambient gradient; single batched evaluation."""
    h = rel * np.maximum(1.0, np.abs(x))
    if nonneg:
        # keep x - h (essentially) inside the nonnegative orthant; kernels
        # clip the residual sub-1e-12 excursions before taking square roots
        h = np.maximum(np.where(x - h < 0.0, 0.5 * x, h), 1e-12)
    steps = np.diag(h)
    pts = np.concatenate([x + steps, x - steps], axis=0)
    vals = np.asarray(f_batch(pts), dtype=float)
    n = x.size
    return (vals[:n] - vals[n:]) / (2.0 * h)


def _retract_with_halving(geom, x, eta, max_halvings):
    for _ in range(max_halvings + 1):
        try:
            return geom.retract(x, eta), eta
        except DomainViolation:
            eta = 0.5 * eta
    return x, np.zeros_like(eta)


def _ascend_gd(f_batch, geom, x0, cfg: OptimizerConfig):
    x = geom.sanitize(x0)
    fx = float(np.asarray(f_batch(x[None]))[0])
    step = cfg.tr_initial_radius
    for _ in range(cfg.max_iters):
        g_amb = _fd_gradient(f_batch, x, cfg.fd_step, geom.fd_nonneg)
        rg = geom.rgrad(x, g_amb)
        gn = math.sqrt(max(geom.inner(x, rg, rg), 0.0))
        if not np.isfinite(gn) or gn < cfg.grad_tol:
            break
        direction = rg / gn
        t = step
        accepted = False
        for _ in range(cfg.armijo_max_backtracks):
            cand, _ = _retract_with_halving(geom, x, t * direction, cfg.max_halvings)
            fc = float(np.asarray(f_batch(cand[None]))[0])
            if np.isfinite(fc) and fc >= fx + cfg.armijo_c1 * t * gn:
                # grow the base step only when the step was high quality;
                # otherwise shrink it, which breaks reflection fixpoints
                # around an optimum that bare Armijo acceptance tolerates
                good = fc - fx >= 0.5 * t * gn
                x, fx = cand, fc
                accepted = True
                step = min(2.0 * t, cfg.tr_max_radius) if good else max(0.5 * t, 1e-12)
                break
            t *= cfg.armijo_backtrack
        if not accepted:
            break
    return x, fx


def _steihaug(g, hess, radius, inner, max_inner):
    """Truncated CG on the model  m(eta) = <g, eta> + 0.5 <eta, H eta>.

    Returns (eta, H @ eta, hit_boundary); the H-product is tracked
    incrementally so the caller can price the model without extra actions.
    """
    eta = np.zeros_like(g)
    h_eta = np.zeros_like(g)
    r = g.copy()
    p = -r
    rr = inner(r, r)
    rr0 = rr
    if rr == 0.0:
        return eta, h_eta, False

    def to_boundary(eta, p):
        pp = inner(p, p)
        ep = inner(eta, p)
        ee = inner(eta, eta)
        disc = max(ep * ep + pp * (radius**2 - ee), 0.0)
        return (-ep + math.sqrt(disc)) / pp

    for _ in range(max_inner):
        hp = hess(p)
        php = inner(p, hp)
        if php <= 0.0:
            tau = to_boundary(eta, p)
            return eta + tau * p, h_eta + tau * hp, True
        alpha = rr / php
        eta_new = eta + alpha * p
        if math.sqrt(inner(eta_new, eta_new)) >= radius:
            tau = to_boundary(eta, p)
            return eta + tau * p, h_eta + tau * hp, True
        eta = eta_new
        h_eta = h_eta + alpha * hp
        r = r + alpha * hp
        rr_new = inner(r, r)
        if rr_new <= rr0 * 1e-4:
            return eta, h_eta, False
        p = -r + (rr_new / rr) * p
        rr = rr_new
    return eta, h_eta, False


def _ascend_tr(f_batch, geom, x0, cfg: OptimizerConfig, d: int):
    x = geom.sanitize(x0)
    fx = float(np.asarray(f_batch(x[None]))[0])
    radius = cfg.tr_initial_radius
    for _ in range(cfg.max_iters):
        cache: dict[bytes, np.ndarray] = {}

        def grad_field(p):
            p = geom.sanitize(p)
            key = p.tobytes()
            if key not in cache:
                cache[key] = -geom.rgrad(p, _fd_gradient(f_batch, p, cfg.fd_step, geom.fd_nonneg))
            return cache[key]

        g = grad_field(x)  # gradient of the negated acquisition
        gn = math.sqrt(max(geom.inner(x, g, g), 0.0))
        if not np.isfinite(gn) or gn < cfg.grad_tol:
            break
        metric = lambda u, v: geom.inner(x, u, v)
        hess = lambda eta: geom.hess_action(x, eta, grad_field)
        eta, h_eta, hit = _steihaug(g, hess, radius, metric, max(d, 1))
        pred = -(metric(g, eta) + 0.5 * metric(eta, h_eta))
        if pred <= 0.0 or not np.isfinite(pred):
            radius *= 0.25
            if radius < 1e-12:
                break
            continue
        cand, eta_used = _retract_with_halving(geom, x, eta, cfg.max_halvings)
        if eta_used is not eta:
            pred = -(metric(g, eta_used) + 0.5 * metric(eta_used, hess(eta_used)))
        fc = float(np.asarray(f_batch(cand[None]))[0])
        rho = (fc - fx) / pred if pred > 0.0 else -math.inf
        if rho < 0.25:
            radius *= 0.25
        elif rho > 0.75 and hit:
            radius = min(2.0 * radius, cfg.tr_max_radius)
        if np.isfinite(fc) and rho > cfg.tr_rho_threshold and fc > fx:
            x, fx = cand, fc
        if radius < 1e-12:
            break
    return x, fx


def _ascend_projected(f_batch, project, x0, cfg: OptimizerConfig, nonneg: bool):
    x = project(np.asarray(x0, dtype=float))
    fx = float(np.asarray(f_batch(x[None]))[0])
    step = 1.0
    for _ in range(cfg.max_iters):
        g = _fd_gradient(f_batch, x, cfg.fd_step, nonneg)
        gn = float(np.linalg.norm(g))
        if not np.isfinite(gn) or gn < cfg.grad_tol:
            break
        t = step
        accepted = False
        for _ in range(cfg.armijo_max_backtracks):
            try:
                cand = project(x + t * g)
            except ValueError:
                # trial step left the projectable region entirely
                t *= cfg.armijo_backtrack
                continue
            move = cand - x
            gain = float(g @ move)
            fc = float(np.asarray(f_batch(cand[None]))[0])
            if np.isfinite(fc) and gain > 0.0 and fc >= fx + cfg.armijo_c1 * gain:
                if float(np.linalg.norm(move)) < 1e-14:
                    return cand, fc
                good = fc - fx >= 0.5 * gain
                x, fx = cand, fc
                accepted = True
                step = min(2.0 * t, 1e6) if good else max(0.5 * t, 1e-12)
                break
            t *= cfg.armijo_backtrack
        if not accepted:
            break
    return x, fx


def _multistart(runner, starts):
    best_x, best_v = None, -math.inf
    for x0 in starts:
        x, v = runner(x0)
        if np.isfinite(v) and v > best_v:
            best_x, best_v = x, v
    if best_x is None:
        raise RuntimeError("acquisition was non-finite at every start")
    return best_x, best_v


def _uniform_starts(rng, d, count, on_sphere):
    starts = []
    for _ in range(count):
        x = sample_uniform(rng, d)
        starts.append(np.sqrt(x) if on_sphere else x)
    return starts


def maximize_riemannian(f_batch, alpha: int, d: int, cfg: OptimizerConfig, rng) -> np.ndarray:
    """Maximize a batch-callable over the simplex (alpha=-1) or orthant (alpha=0)."""
    if alpha not in _GEOMETRIES:
        raise ValueError(f"alpha must be -1 or 0, got {alpha!r}")
    geom = _GEOMETRIES[alpha]
    starts = _uniform_starts(rng, d, cfg.restarts, on_sphere=(alpha == 0))
    if cfg.method == "riemannian_gd_armijo":
        runner = lambda x0: _ascend_gd(f_batch, geom, x0, cfg)
    else:
        runner = lambda x0: _ascend_tr(f_batch, geom, x0, cfg, d)
    x, _ = _multistart(runner, starts)
    return x


def maximize_projected(f_batch, domain: str, d: int, cfg: OptimizerConfig, rng) -> np.ndarray:
    """Projected-gradient ascent in ambient coordinates over the domain."""
    if domain == "simplex":
        from .simplex import project_to_simplex as project

        nonneg, on_sphere = True, False
    elif domain == "sphere_orthant":
        project = orthant_retract
        nonneg, on_sphere = False, True
    else:
        raise ValueError(f"unknown domain {domain!r}")
    starts = _uniform_starts(rng, d, cfg.restarts, on_sphere=on_sphere)
    runner = lambda x0: _ascend_projected(f_batch, project, x0, cfg, nonneg)
    x, _ = _multistart(runner, starts)
    return x


def optimize_acq_alpha(
    post: GpPosterior, acq: AcqSpec, cfg: OptimizerConfig, alpha: int, rng
) -> np.ndarray:
    """Maximize the acquisition with the alpha-connection optimizer."""
    d = post.data.inputs.shape[1] - 1
    f_batch = lambda X: acq_values(post, acq, X)
    return maximize_riemannian(f_batch, alpha, d, cfg, rng)


def optimize_acq_projected(
    post: GpPosterior, acq: AcqSpec, cfg: OptimizerConfig, domain: str, rng
) -> np.ndarray:
    """Maximize the acquisition with constrained Euclidean ascent."""
    d = post.data.inputs.shape[1] - 1
    f_batch = lambda X: acq_values(post, acq, X)
    return maximize_projected(f_batch, domain, d, cfg, rng)
