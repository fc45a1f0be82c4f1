"""Positive-definite kernels on the sphere, the simplex, and Euclidean space.

Spherical Matern/SE kernels are truncated Gegenbauer series driven by the
spectrum of the sphere Laplacian; the simplex kernel is their pullback
through the square-root map.  Euclidean SE/Matern kernels on raw ambient
coordinates serve as the constrained-Euclidean baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "DEFAULT_N_TRUNC",
    "GramFactorizationError",
    "GramMatrix",
    "KAPPA_BOUNDS",
    "KernelSpec",
    "NOISE_BOUNDS",
    "PrecomputedPairs",
    "SIGMA2_BOUNDS",
    "chol_with_jitter",
    "euclid_kernel",
    "gegenbauer",
    "gram",
    "kernel_matrix",
    "simplex_kernel",
    "spectral_coeff",
    "sphere_kernel",
]

SPHERICAL_FAMILIES = ("spherical_se", "spherical_matern")
EUCLID_FAMILIES = ("euclid_se", "euclid_matern")
MATERN_NUS = (0.5, 1.5, 2.5)

DEFAULT_N_TRUNC = 64

# Hyperparameter-fitting bounds, consumed by the gp module.
KAPPA_BOUNDS = (0.05, 10.0)
SIGMA2_BOUNDS = (1e-3, 1e3)
NOISE_BOUNDS = (1e-8, 1.0)

# Jitter escalation: start at 1e-10 * sigma2, multiply by 10 on Cholesky
# failure, give up past 1e-4 * sigma2.
JITTER_START_FACTOR = 1e-10
JITTER_MAX_FACTOR = 1e-4


class GramFactorizationError(np.linalg.LinAlgError):
    """Cholesky failed even at the maximum allowed jitter."""


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family with hyperparameters.

    ``nu`` is the Matern smoothness (``inf`` for squared-exponential),
    ``kappa`` the lengthscale, ``sigma2`` the signal variance, ``n_trunc``
    the series truncation (spherical families only) and ``dim`` the
    intrinsic dimension d of the sphere/simplex.
    """

    family: str
    kappa: float
    sigma2: float
    dim: int
    nu: float = math.inf
    n_trunc: int = DEFAULT_N_TRUNC

    def __post_init__(self):
        if self.family not in SPHERICAL_FAMILIES + EUCLID_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.kappa > 0.0:
            raise ValueError("kappa must be positive")
        if not self.sigma2 > 0.0:
            raise ValueError("sigma2 must be positive")
        if self.n_trunc < 1:
            raise ValueError("n_trunc must be >= 1")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.family.endswith("_se"):
            if not math.isinf(self.nu):
                raise ValueError("squared-exponential families fix nu = inf")
        elif self.nu not in MATERN_NUS:
            raise ValueError(f"Matern nu must be one of {MATERN_NUS}, got {self.nu!r}")

    @property
    def spherical(self) -> bool:
        return self.family in SPHERICAL_FAMILIES

    def with_params(self, **kw) -> "KernelSpec":
        fields = dict(
            family=self.family, kappa=self.kappa, sigma2=self.sigma2,
            dim=self.dim, nu=self.nu, n_trunc=self.n_trunc,
        )
        fields.update(kw)
        return KernelSpec(**fields)


def gegenbauer(n: int, lam: float, t) -> np.ndarray | float:
    """Gegenbauer polynomial C_n^lam(t) via the three-term recurrence.

    Vectorized over ``t``; requires ``lam > 0`` (the lam = 0 circle case is
    handled by the kernel directly through its Chebyshev limit).
    """
    if lam <= 0.0:
        raise ValueError("gegenbauer requires lam > 0")
    if n < 0:
        raise ValueError("gegenbauer requires n >= 0")
    t = np.asarray(t, dtype=float)
    c_prev = np.ones_like(t)
    if n == 0:
        return c_prev if t.ndim else float(c_prev)
    c_cur = 2.0 * lam * t
    for k in range(2, n + 1):
        c_next = (2.0 * t * (k + lam - 1.0) * c_cur - (k + 2.0 * lam - 2.0) * c_prev) / k
        c_prev, c_cur = c_cur, c_next
    return c_cur if t.ndim else float(c_cur)


def spectral_coeff(n, spec: KernelSpec):
    """Spectral weight rho_nu(n) of the degree-n sphere harmonics.

    Uses the sphere Laplacian eigenvalues ``lam_n = n (n + d - 1)``:
    ``(2 nu / kappa^2 + lam_n) ** (-nu - d/2)`` for finite nu and
    ``exp(-kappa^2 lam_n / 2)`` for the squared exponential.
    """
    n = np.asarray(n, dtype=float)
    lam_n = n * (n + spec.dim - 1.0)
    if math.isinf(spec.nu):
        out = np.exp(-0.5 * spec.kappa**2 * lam_n)
    else:
        out = (2.0 * spec.nu / spec.kappa**2 + lam_n) ** (-spec.nu - spec.dim / 2.0)
    return out if out.ndim else float(out)


def _zonal_series(tvals: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Unnormalized series sum over cos(geodesic distance) values."""
    d = spec.dim
    n_max = spec.n_trunc
    rho = spectral_coeff(np.arange(n_max + 1), spec)
    t = np.asarray(tvals, dtype=float)
    if d == 1:
        # Chebyshev limit of the vanishing-lam Gegenbauer terms
        theta = np.arccos(np.clip(t, -1.0, 1.0))
        total = rho[0] * np.ones_like(t)
        for n in range(1, n_max + 1):
            total += rho[n] * 2.0 * np.cos(n * theta)
        return total
    lam = 0.5 * (d - 1.0)
    coeff = (2.0 * np.arange(n_max + 1) + d - 1.0) / (d - 1.0)
    total = coeff[0] * rho[0] * np.ones_like(t)
    c_prev = np.ones_like(t)
    if n_max >= 1:
        c_cur = 2.0 * lam * t
        total = total + coeff[1] * rho[1] * c_cur
        for n in range(2, n_max + 1):
            c_next = (2.0 * t * (n + lam - 1.0) * c_cur - (n + 2.0 * lam - 2.0) * c_prev) / n
            total = total + coeff[n] * rho[n] * c_next
            c_prev, c_cur = c_cur, c_next
    return total


@lru_cache(maxsize=512)
def _norm_const(spec: KernelSpec) -> float:
    """Series value at zero distance, making k(s, s) = sigma2 exactly."""
    value = float(_zonal_series(np.ones(1), spec)[0])
    if not np.isfinite(value) or value <= 0.0:
        raise FloatingPointError(
            f"kernel normalization is {value!r}; n_trunc/kappa pathology in {spec}"
        )
    return value


def _sphere_kernel_from_cos(cosvals: np.ndarray, spec: KernelSpec) -> np.ndarray:
    vals = spec.sigma2 * _zonal_series(cosvals, spec) / _norm_const(spec)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite kernel series sum")
    return vals


def sphere_kernel(s: np.ndarray, s2: np.ndarray, spec: KernelSpec) -> float:
    """Spherical Matern/SE kernel value between two unit vectors."""
    if not spec.spherical:
        raise ValueError(f"{spec.family} is not a spherical family")
    s = np.asarray(s, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    c = np.clip(np.dot(s, s2), -1.0, 1.0)
    return float(_sphere_kernel_from_cos(np.asarray(c), spec))


def simplex_kernel(x: np.ndarray, x2: np.ndarray, spec: KernelSpec) -> float:
    """Pullback of the sphere kernel through the square-root map."""
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    s = np.sqrt(np.maximum(x, 0.0))
    s2 = np.sqrt(np.maximum(x2, 0.0))
    return sphere_kernel(s, s2, spec)


def _euclid_from_dist(r: np.ndarray, spec: KernelSpec) -> np.ndarray:
    scaled = r / spec.kappa
    if math.isinf(spec.nu):
        return spec.sigma2 * np.exp(-0.5 * scaled**2)
    if spec.nu == 0.5:
        return spec.sigma2 * np.exp(-scaled)
    if spec.nu == 1.5:
        a = math.sqrt(3.0) * scaled
        return spec.sigma2 * (1.0 + a) * np.exp(-a)
    a = math.sqrt(5.0) * scaled
    return spec.sigma2 * (1.0 + a + a**2 / 3.0) * np.exp(-a)


def _pairwise_dist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # explicit differences (not the gemm expansion) so scalar and matrix
    # evaluations agree bitwise
    diff = A[:, None, :] - B[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def euclid_kernel(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> float:
    """Euclidean SE/Matern kernel on ambient coordinates."""
    if spec.spherical:
        raise ValueError(f"{spec.family} is not a Euclidean family")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("euclid_kernel requires equal-length vectors")
    return float(kernel_matrix(a[None], b[None], spec, "ambient")[0, 0])


def kernel_matrix(
    points_a: np.ndarray,
    points_b: np.ndarray,
    spec: KernelSpec,
    domain: str,
) -> np.ndarray:
    """Pairwise kernel values between two stacks of row vectors.

    ``domain`` declares what the rows are: 'sphere' (unit vectors), 'simplex'
    (probability vectors, mapped through the square root for spherical
    families) or 'ambient' (raw coordinates, Euclidean families only).
    """
    A = np.atleast_2d(np.asarray(points_a, dtype=float))
    B = np.atleast_2d(np.asarray(points_b, dtype=float))
    if spec.spherical:
        if domain == "simplex":
            A = np.sqrt(np.maximum(A, 0.0))
            B = np.sqrt(np.maximum(B, 0.0))
        elif domain != "sphere":
            raise ValueError(f"spherical kernel on domain {domain!r}")
        cos = np.clip(A @ B.T, -1.0, 1.0)
        return _sphere_kernel_from_cos(cos, spec)
    return _euclid_from_dist(_pairwise_dist(A, B), spec)


def kernel_diag(points: np.ndarray, spec: KernelSpec, domain: str) -> np.ndarray:
    """Per-row prior variances k(x, x) without forming the full matrix."""
    A = np.atleast_2d(np.asarray(points, dtype=float))
    if not spec.spherical:
        return np.full(A.shape[0], spec.sigma2)
    if domain == "simplex":
        A = np.sqrt(np.maximum(A, 0.0))
    elif domain != "sphere":
        raise ValueError(f"spherical kernel on domain {domain!r}")
    cos = np.clip(np.sum(A * A, axis=1), -1.0, 1.0)
    return _sphere_kernel_from_cos(cos, spec)


def chol_with_jitter(
    mat: np.ndarray, sigma2: float, start_jitter: float | None = None
) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``mat + jitter * I`` with escalation.

    Returns the factor and the jitter actually applied.
    """
    jitter = JITTER_START_FACTOR * sigma2 if start_jitter is None else start_jitter
    max_jitter = JITTER_MAX_FACTOR * sigma2
    eye = np.eye(mat.shape[0])
    while True:
        try:
            return np.linalg.cholesky(mat + jitter * eye), jitter
        except np.linalg.LinAlgError:
            if jitter >= max_jitter:
                raise GramFactorizationError(
                    f"Cholesky failed at maximum jitter {jitter!r}"
                ) from None
            jitter = min(jitter * 10.0, max_jitter)


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric kernel matrix plus the jitter that made it factorizable."""

    values: np.ndarray
    spec: KernelSpec
    jitter: float
    chol: np.ndarray

    @property
    def with_jitter(self) -> np.ndarray:
        return self.values + self.jitter * np.eye(self.values.shape[0])


def gram(
    points: np.ndarray,
    spec: KernelSpec,
    jitter: float | None = None,
    domain: str | None = None,
) -> GramMatrix:
    """Assemble the pairwise kernel matrix and verify factorizability.

    ``domain`` defaults to 'ambient' for Euclidean families; for spherical
    families it is inferred from the rows (unit norm -> sphere, unit sum ->
    simplex) unless given explicitly.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 1:
        raise ValueError("gram requires at least one point")
    if domain is None:
        domain = _infer_domain(pts, spec)
    values = kernel_matrix(pts, pts, spec, domain)
    values = 0.5 * (values + values.T)
    chol, applied = chol_with_jitter(values, spec.sigma2, start_jitter=jitter)
    return GramMatrix(values=values, spec=spec, jitter=applied, chol=chol)


def _infer_domain(pts: np.ndarray, spec: KernelSpec) -> str:
    if not spec.spherical:
        return "ambient"
    norms = np.linalg.norm(pts, axis=1)
    if np.allclose(norms, 1.0, atol=1e-8):
        return "sphere"
    if np.allclose(pts.sum(axis=1), 1.0, atol=1e-8) and np.all(pts >= -1e-12):
        return "simplex"
    raise ValueError("cannot infer point domain for a spherical kernel")


class PrecomputedPairs:
    """Distance structure of a fixed point set, for cheap re-assembly.

    Hyperparameter fitting evaluates the Gram matrix at many (kappa, sigma2)
    values; the pairwise geometry never changes, so the Gegenbauer terms
    (spherical families) or the distance matrix (Euclidean families) are
    computed once.  ``gram_values`` then matches :func:`kernel_matrix` on the
    same points to floating-point accuracy.
    """

    def __init__(self, points: np.ndarray, spec: KernelSpec, domain: str):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        self.spec = spec
        self.n = pts.shape[0]
        if spec.spherical:
            if domain == "simplex":
                pts = np.sqrt(np.maximum(pts, 0.0))
            elif domain != "sphere":
                raise ValueError(f"spherical kernel on domain {domain!r}")
            cos = np.clip(pts @ pts.T, -1.0, 1.0)
            d, n_max = spec.dim, spec.n_trunc
            if d == 1:
                theta = np.arccos(cos)
                terms = [np.ones_like(cos)]
                terms += [2.0 * np.cos(n * theta) for n in range(1, n_max + 1)]
                self._diag_terms = np.array([1.0] + [2.0] * n_max)
            else:
                lam = 0.5 * (d - 1.0)
                coeff = (2.0 * np.arange(n_max + 1) + d - 1.0) / (d - 1.0)
                terms = [coeff[0] * np.ones_like(cos)]
                c_prev = np.ones_like(cos)
                c_cur = 2.0 * lam * cos
                if n_max >= 1:
                    terms.append(coeff[1] * c_cur)
                for n in range(2, n_max + 1):
                    c_next = (
                        2.0 * cos * (n + lam - 1.0) * c_cur
                        - (n + 2.0 * lam - 2.0) * c_prev
                    ) / n
                    terms.append(coeff[n] * c_next)
                    c_prev, c_cur = c_cur, c_next
                diag = [coeff[0] * 1.0]
                c_prev_s, c_cur_s = 1.0, 2.0 * lam
                if n_max >= 1:
                    diag.append(coeff[1] * c_cur_s)
                for n in range(2, n_max + 1):
                    c_next_s = (
                        2.0 * (n + lam - 1.0) * c_cur_s - (n + 2.0 * lam - 2.0) * c_prev_s
                    ) / n
                    diag.append(coeff[n] * c_next_s)
                    c_prev_s, c_cur_s = c_cur_s, c_next_s
                self._diag_terms = np.array(diag)
            self._terms = np.stack(terms)
        else:
            self._dist = _pairwise_dist(pts, pts)

    def gram_values(self, kappa: float, sigma2: float) -> np.ndarray:
        spec = self.spec.with_params(kappa=kappa, sigma2=sigma2)
        if spec.spherical:
            rho = spectral_coeff(np.arange(spec.n_trunc + 1), spec)
            norm = float(rho @ self._diag_terms)
            K = sigma2 * np.tensordot(rho, self._terms, axes=1) / norm
        else:
            K = _euclid_from_dist(self._dist, spec)
        return 0.5 * (K + K.T)
