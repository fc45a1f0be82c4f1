"""Geometry of the probability simplex under the Fisher-Rao metric.

Points live in ambient coordinates: a point of the d-dimensional simplex is a
vector of d+1 nonnegative entries summing to one.  Tangent vectors use the
score representation, i.e. a tangent vector ``eta`` at ``x`` satisfies
``sum(x * eta) == 0``, and the metric is ``<u, v>_x = sum(x * u * v)``.

The module provides the element-wise square-root map onto the sphere (an
isometry onto the positive orthant of the radius-2 sphere), the closed-form
exponential maps of the mixture (alpha=1), Levi-Civita (alpha=0) and
exponential (alpha=-1) connections, the alpha=0 logarithm, the natural
gradient, a finite-difference alpha-connection Hessian action, Euclidean
projection onto the simplex, uniform sampling, and the RBF weight blend used
for time-varying mixture weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainViolation",
    "EPS_INTERIOR",
    "WeightMatrix",
    "alpha_hessian_action",
    "blend_weights",
    "check_simplex_point",
    "check_tangent",
    "ensure_interior",
    "exp_map",
    "fisher_distance",
    "fisher_inner",
    "fisher_norm",
    "inv_sphere_map",
    "log_map_alpha0",
    "natural_gradient",
    "project_to_simplex",
    "sample_uniform",
    "sphere_map",
    "tangent_project",
]

# Points with any coordinate below this are clamped before exponential-
# connection operations, which are singular on the boundary.
EPS_INTERIOR = 1e-10


class DomainViolation(ValueError):
    """A geometric operation would leave the simplex (or its interior)."""


def check_simplex_point(x: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Validate and return ``x`` as a simplex point (nonneg, sums to one)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError(f"expected a 1-d vector of length >= 2, got shape {x.shape}")
    if np.any(x < -atol):
        raise ValueError(f"negative coordinate {x.min():.3e} in simplex point")
    if abs(x.sum() - 1.0) > max(atol, 1e-12):
        raise ValueError(f"coordinates sum to {x.sum()!r}, expected 1")
    return x


def check_tangent(x: np.ndarray, u: np.ndarray, atol: float = 1e-8) -> np.ndarray:
    """Validate that ``u`` is a score-representation tangent vector at ``x``."""
    u = np.asarray(u, dtype=float)
    if u.shape != np.shape(x):
        raise ValueError(f"tangent shape {u.shape} does not match point shape {np.shape(x)}")
    mean = float(np.dot(x, u))
    scale = max(1.0, float(np.max(np.abs(u), initial=0.0)))
    if abs(mean) > atol * scale:
        raise ValueError(f"vector is not tangent at x: sum(x*u) = {mean:.3e}")
    return u


def ensure_interior(x: np.ndarray, eps: float = EPS_INTERIOR) -> np.ndarray:
    """Clamp coordinates below ``eps`` and renormalize to sum one."""
    x = np.asarray(x, dtype=float)
    if np.all(x >= eps):
        return x
    y = np.maximum(x, eps)
    return y / y.sum()


def sphere_map(x: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Map a simplex point to the radius-``radius`` sphere, element-wise sqrt.

    ``radius=2`` is the isometry onto the positive sphere orthant; ``radius=1``
    is the same map scaled by one half (distances scale by the same factor).
    """
    if radius not in (1.0, 2.0, 1, 2):
        raise ValueError(f"radius must be 1 or 2, got {radius!r}")
    x = check_simplex_point(x)
    return radius * np.sqrt(np.maximum(x, 0.0))


def inv_sphere_map(s: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Invert :func:`sphere_map`: element-wise ``(s/radius)**2``, renormalized."""
    s = np.asarray(s, dtype=float)
    if np.any(s < -1e-8):
        raise DomainViolation(f"sphere point has entry {s.min():.3e} < -1e-8")
    nrm = float(np.linalg.norm(s))
    if abs(nrm - radius) > 1e-6:
        raise DomainViolation(f"norm {nrm!r} deviates from radius {radius!r} by > 1e-6")
    x = (np.maximum(s, 0.0) / radius) ** 2
    return x / x.sum()


def fisher_inner(x: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    """Fisher-Rao inner product ``sum(x * u * v)`` of tangent vectors at x."""
    x = np.asarray(x, dtype=float)
    u = check_tangent(x, u)
    v = check_tangent(x, v)
    return float(np.sum(x * u * v))


def fisher_norm(x: np.ndarray, u: np.ndarray) -> float:
    """Fisher-Rao norm ``sqrt(sum(x * u**2))``; no tangency validation."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return float(np.sqrt(np.sum(x * u * u)))


def fisher_distance(x: np.ndarray, x2: np.ndarray) -> float:
    """Geodesic (Fisher-Rao) distance ``2*arccos(sum(sqrt(x*x2)))``."""
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    c = float(np.sum(np.sqrt(np.maximum(x * x2, 0.0))))
    return 2.0 * float(np.arccos(np.clip(c, -1.0, 1.0)))


def tangent_project(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Project an ambient vector onto the tangent space: ``u - (x.u) * 1``."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return u - float(np.dot(x, u))


def natural_gradient(x: np.ndarray, euclid_grad: np.ndarray) -> np.ndarray:
    """Fisher-Rao gradient from a Euclidean gradient.

    The Riemannian gradient of F at x is the Euclidean gradient minus its
    x-expectation, broadcast over all coordinates.  The result satisfies
    ``<grad, v>_x = dF[v]`` for every tangent v.
    """
    return tangent_project(x, euclid_grad)


def exp_map(x: np.ndarray, eta: np.ndarray, alpha: float) -> np.ndarray:
    """Exponential map of the alpha-connection, alpha in {-1, 0, 1}.

    alpha=1 (mixture):      x + eta*x               (may leave the simplex)
    alpha=-1 (exponential): exp(eta)*x / <x,exp(eta)>  (always interior)
    alpha=0 (Levi-Civita):  sphere geodesic through the square-root map;
                            steps longer than the quarter-arc bound
                            (Fisher norm pi) are rescaled to it.

    Raises :class:`DomainViolation` when the alpha in {0, 1} image leaves the
    simplex; the caller owns the retry/shrink policy.
    """
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if alpha == 1:
        y = x * (1.0 + eta)
        if np.any(y < 0.0):
            raise DomainViolation("mixture-connection step leaves the simplex")
        return y / y.sum()
    if alpha == -1:
        x = ensure_interior(x)
        # shift-invariant form of exp(eta)*x / <x, exp(eta)>
        w = x * np.exp(eta - eta.max())
        return w / w.sum()
    if alpha == 0:
        nf = fisher_norm(x, eta)
        if nf == 0.0:
            return x.copy()
        if nf > np.pi:
            eta = eta * (np.pi / nf)
            nf = np.pi
        s = np.sqrt(np.maximum(x, 0.0))
        half = 0.5 * nf
        q = s * np.cos(half) + (s * eta / nf) * np.sin(half)
        if np.any(q < -1e-12):
            raise DomainViolation("Levi-Civita step leaves the positive orthant")
        p = np.maximum(q, 0.0) ** 2
        return p / p.sum()
    raise ValueError(f"no closed-form exponential map for alpha={alpha!r}")


def log_map_alpha0(x: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Inverse of the alpha=0 exponential map.

    Computed through the sphere logarithm of the square-root images; the
    Fisher norm of the result equals the Fisher-Rao distance.
    Requires ``x`` in the interior of the simplex.
    """
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if np.any(x <= 0.0):
        raise DomainViolation("logarithmic map undefined at boundary base points")
    s = np.sqrt(x)
    s2 = np.sqrt(np.maximum(x2, 0.0))
    c = float(np.clip(np.dot(s, s2), -1.0, 1.0))
    theta = float(np.arccos(c))
    u = s2 - c * s
    nu = float(np.linalg.norm(u))
    if theta < 1e-15 or nu < 1e-15:
        return np.zeros_like(x)
    w = (theta / nu) * u
    return 2.0 * w / s


def project_to_simplex(u: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the simplex (sort-and-threshold)."""
    u = np.asarray(u, dtype=float)
    srt = np.sort(u)[::-1]
    css = np.cumsum(srt) - 1.0
    ks = np.arange(1, u.size + 1)
    valid = srt - css / ks > 0.0
    k = int(ks[valid][-1])
    theta = css[k - 1] / k
    return np.maximum(u - theta, 0.0)


def sample_uniform(rng: np.random.Generator, d: int) -> np.ndarray:
    """Uniform sample on the d-simplex (normalized standard exponentials)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    e = rng.standard_exponential(d + 1)
    return e / e.sum()


def alpha_hessian_action(
    x: np.ndarray,
    grad_field,
    eta: np.ndarray,
    alpha: float,
    fd_step: float = 1e-5,
) -> np.ndarray:
    """Covariant derivative of a tangent field along ``eta``, alpha-connection.

    ``grad_field`` maps a simplex point to a tangent vector (score
    representation).  The Euclidean field derivative is approximated by
    central differences along the alpha-geodesic through x, then the
    connection corrections ``(1+alpha)/2 * eta*xi`` and
    ``(1-alpha)/2 * <x, eta*xi>`` are added and the sum is projected back to
    the tangent space at x.  Used with the gradient field of an objective
    this is the alpha-connection Hessian action.
    """
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if not -1.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [-1, 1], got {alpha!r}")
    nf = fisher_norm(x, eta)
    if nf == 0.0:
        return np.zeros_like(x)
    unit = eta / nf
    h = fd_step * max(1.0, nf)
    # alpha in {-1, 0, 1} has a closed-form geodesic; other alpha values use
    # the alpha=0 curve, which shares the same velocity at t=0.
    curve_alpha = alpha if alpha in (-1.0, 0.0, 1.0, -1, 0, 1) else 0
    x_plus = exp_map(x, h * unit, curve_alpha)
    x_minus = exp_map(x, -h * unit, curve_alpha)
    g_plus = np.asarray(grad_field(x_plus), dtype=float)
    g_minus = np.asarray(grad_field(x_minus), dtype=float)
    if not (np.all(np.isfinite(g_plus)) and np.all(np.isfinite(g_minus))):
        raise ValueError("grad_field returned non-finite values")
    d2 = (g_plus - g_minus) * (nf / (2.0 * h))
    xi = np.asarray(grad_field(x), dtype=float)
    had = eta * xi
    corr = 0.5 * (1.0 + alpha) * had + 0.5 * (1.0 - alpha) * float(np.dot(x, had))
    return tangent_project(x, d2 + corr)


@dataclass(frozen=True)
class WeightMatrix:
    """Columns in the simplex plus fixed RBF centers and widths.

    ``columns`` has shape (n_weights, n_rbf); every column is a simplex point.
    """

    columns: np.ndarray
    centers: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=float)
        centers = np.asarray(self.centers, dtype=float)
        widths = np.asarray(self.widths, dtype=float)
        if cols.ndim != 2:
            raise ValueError("columns must be a 2-d array (n_weights, n_rbf)")
        if centers.shape != (cols.shape[1],) or widths.shape != (cols.shape[1],):
            raise ValueError("centers/widths must have one entry per column")
        if np.any(widths <= 0.0):
            raise ValueError("RBF widths must be strictly positive")
        for k in range(cols.shape[1]):
            check_simplex_point(cols[:, k], atol=1e-9)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "widths", widths)


def blend_weights(pi: WeightMatrix, t: float) -> np.ndarray:
    """RBF-weighted blend of simplex columns; the output is a simplex point.

    ``alpha_i(t) = sum_k pi[i,k] psi_k(t) / sum_k psi_k(t)`` with Gaussian
    RBFs ``psi_k``.  Because every column sums to one, so does the output.
    """
    expo = -0.5 * ((t - pi.centers) / pi.widths) ** 2
    raw = np.exp(expo)
    if raw.sum() < 1e-300:
        raise ValueError(f"RBF denominator underflow at t={t!r}")
    # stabilized ratio: shifting exponents by the max leaves the blend unchanged
    psi = np.exp(expo - expo.max())
    out = pi.columns @ psi / psi.sum()
    return out
