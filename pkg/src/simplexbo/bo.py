"""Bayesian-optimization loops on the simplex and its sphere image.

Four methods share one loop skeleton and differ in where the surrogate
lives and how the acquisition is maximized:

* ``alpha0`` — dataset mapped to the unit-sphere orthant, spherical kernel,
  Riemannian optimizer with great-circle steps (Levi-Civita route).
* ``alpha_minus1`` — dataset on the simplex, pullback spherical kernel,
  Riemannian optimizer with exponential-connection steps.
* ``eucl_simplex`` — Euclidean kernel on raw simplex coordinates, projected
  Euclidean ascent (the BORIS-style baseline).
* ``eucl_sphere`` — Euclidean kernel on sphere coordinates, projected ascent
  with the orthant retraction.

Every run records queries as simplex points, keeps a monotone incumbent and
returns the best observed pair.  Runs are deterministic given the seed, and
the initial design depends on the seed only, so compared methods share it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .acquisition import AcqSpec, OptimizerConfig, acq_values, maximize_projected, maximize_riemannian
from .gp import Dataset, condition, fit_hyperparams
from .kernels import KernelSpec
from .simplex import EPS_INTERIOR, ensure_interior, inv_sphere_map, sample_uniform, sphere_map

__all__ = [
    "METHODS",
    "MethodConfig",
    "ObjectiveError",
    "RunRecord",
    "RunRow",
    "run_bo",
    "simple_regret",
]

METHODS = ("alpha0", "alpha_minus1", "eucl_simplex", "eucl_sphere")
_METHOD_INDEX = {m: i for i, m in enumerate(METHODS)}

_REFIT_DENSE_UNTIL = 50
_REFIT_EVERY = 5


class ObjectiveError(RuntimeError):
    """Base class for objective-evaluation failures (see the harness module)."""


@dataclass(frozen=True)
class MethodConfig:
    method: str
    kernel: KernelSpec
    acq: AcqSpec
    optimizer: OptimizerConfig
    budget: int
    init_count: int
    seed: int
    initial_noise: float = 1e-6

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.budget < 1 or self.init_count < 1:
            raise ValueError("budget and init_count must be >= 1")
        needs_spherical = self.method in ("alpha0", "alpha_minus1")
        if needs_spherical != self.kernel.spherical:
            raise ValueError(
                f"method {self.method!r} is incompatible with kernel family "
                f"{self.kernel.family!r}"
            )


@dataclass(frozen=True)
class RunRow:
    iteration: int
    x: np.ndarray
    y: float
    incumbent: float
    wall_s: float


@dataclass
class RunRecord:
    method: str
    seed: int
    d: int
    rows: list[RunRow] = field(default_factory=list)
    recommendation_x: np.ndarray | None = None
    recommendation_y: float = math.nan
    aborted: bool = False


def _evaluate(objective, x: np.ndarray, rng_retry, d: int, sanitize=None):
    """Evaluate with the retry-once policy for non-finite results."""

    def attempt(pt):
        try:
            return float(objective(pt))
        except ObjectiveError:
            return math.nan

    y = attempt(x)
    if math.isfinite(y):
        return x, y, False
    retry = sample_uniform(rng_retry, d)
    if sanitize is not None:
        retry = sanitize(retry)
    y = attempt(retry)
    if math.isfinite(y):
        return retry, y, False
    return x, math.nan, True


def _check_sphere_point(s: np.ndarray):
    if abs(float(np.linalg.norm(s)) - 1.0) > 1e-10 or np.any(s < -1e-12):
        raise RuntimeError("internal sphere point left the positive orthant")


def _check_interior_point(x: np.ndarray):
    if np.min(x) < 0.99 * EPS_INTERIOR:
        raise RuntimeError("internal simplex point left the clamped interior")


def run_bo(objective, d: int, cfg: MethodConfig) -> RunRecord:
    """Run one BO method for ``budget`` queries after ``init_count`` samples."""
    if cfg.kernel.spherical and cfg.kernel.dim != d:
        raise ValueError(f"kernel dim {cfg.kernel.dim} does not match domain dim {d}")
    on_sphere = cfg.method in ("alpha0", "eucl_sphere")
    domain = "ambient" if cfg.method.startswith("eucl") else ("sphere" if on_sphere else "simplex")

    idx = _METHOD_INDEX[cfg.method]
    rng_init = np.random.default_rng(np.random.SeedSequence([cfg.seed]))
    rng_opt = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1000 + idx]))
    rng_retry = np.random.default_rng(np.random.SeedSequence([cfg.seed, 2000 + idx]))

    record = RunRecord(method=cfg.method, seed=cfg.seed, d=d)
    start = time.perf_counter()
    xs_simplex: list[np.ndarray] = []
    internal: list[np.ndarray] = []
    ys: list[float] = []
    incumbent = -math.inf

    def register(x_simplex: np.ndarray, y: float):
        nonlocal incumbent
        incumbent = max(incumbent, y)
        xs_simplex.append(x_simplex)
        internal.append(sphere_map(x_simplex, 1.0) if on_sphere else x_simplex)
        ys.append(y)
        record.rows.append(
            RunRow(
                iteration=len(record.rows),
                x=x_simplex,
                y=y,
                incumbent=incumbent,
                wall_s=time.perf_counter() - start,
            )
        )

    sanitize = ensure_interior if cfg.method == "alpha_minus1" else None
    for _ in range(cfg.init_count):
        x = sample_uniform(rng_init, d)
        if sanitize is not None:
            x = sanitize(x)
        x, y, failed = _evaluate(objective, x, rng_retry, d, sanitize)
        if failed:
            record.aborted = True
            break
        register(x, y)

    spec = cfg.kernel
    noise = cfg.initial_noise
    prior_mean = float(np.mean(ys)) if ys else 0.0

    for k in range(1, cfg.budget + 1):
        if record.aborted:
            break
        n = len(ys)
        if n >= 2 and (n <= _REFIT_DENSE_UNTIL or k % _REFIT_EVERY == 0 or k == 1):
            data = Dataset(np.array(internal), np.array(ys), noise, domain)
            spec, noise = fit_hyperparams(data, spec)
            prior_mean = float(np.mean(ys))
        post = condition(Dataset(np.array(internal), np.array(ys), noise, domain), spec, prior_mean)
        f_batch = lambda X: acq_values(post, cfg.acq, X)
        if cfg.method == "alpha0":
            q = maximize_riemannian(f_batch, 0, d, cfg.optimizer, rng_opt)
            _check_sphere_point(q)
            x_query = inv_sphere_map(q, 1.0)
        elif cfg.method == "alpha_minus1":
            q = maximize_riemannian(f_batch, -1, d, cfg.optimizer, rng_opt)
            x_query = ensure_interior(q)
            _check_interior_point(x_query)
        elif cfg.method == "eucl_simplex":
            x_query = maximize_projected(f_batch, "simplex", d, cfg.optimizer, rng_opt)
        else:  # eucl_sphere
            q = maximize_projected(f_batch, "sphere_orthant", d, cfg.optimizer, rng_opt)
            _check_sphere_point(q)
            x_query = inv_sphere_map(q, 1.0)
        x_eval, y, failed = _evaluate(objective, x_query, rng_retry, d, sanitize)
        if failed:
            record.aborted = True
            break
        register(x_eval, y)

    if ys:
        best = int(np.argmax(ys))
        record.recommendation_x = xs_simplex[best]
        record.recommendation_y = ys[best]
    return record


def simple_regret(record: RunRecord, f_opt: float) -> np.ndarray:
    """Per-evaluation gap between the known optimum and the incumbent."""
    inc = np.array([row.incumbent for row in record.rows])
    if np.any(inc > f_opt + 1e-9):
        raise ValueError(
            f"incumbent {inc.max()!r} exceeds the declared optimum {f_opt!r}"
        )
    return np.maximum(f_opt - inc, 0.0)
