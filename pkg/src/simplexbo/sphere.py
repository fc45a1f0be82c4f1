"""Unit-hypersphere geometry and the positive-orthant retraction.

Standard embedded-sphere operations (geodesic distance, exponential and
logarithmic maps, tangent projection) plus the clamp-and-renormalize
retraction that keeps optimizer iterates inside the positive orthant.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "check_sphere_point",
    "exp_map_sphere",
    "geodesic_distance",
    "in_positive_orthant",
    "log_map_sphere",
    "orthant_retract",
    "tangent_project_sphere",
]


def check_sphere_point(s: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    nrm = float(np.linalg.norm(s))
    if abs(nrm - 1.0) > atol:
        raise ValueError(f"not a unit vector: |s| = {nrm!r}")
    return s


def in_positive_orthant(s: np.ndarray, atol: float = 1e-12) -> bool:
    return bool(np.all(np.asarray(s) >= -atol))


def geodesic_distance(s: np.ndarray, s2: np.ndarray) -> float:
    """Great-circle distance ``arccos(clip(s . s2))`` in radians."""
    s = np.asarray(s, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    return float(np.arccos(np.clip(np.dot(s, s2), -1.0, 1.0)))


def tangent_project_sphere(s: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Project an ambient vector onto the tangent space at s: ``u - (s.u) s``."""
    s = np.asarray(s, dtype=float)
    u = np.asarray(u, dtype=float)
    return u - float(np.dot(s, u)) * s


def exp_map_sphere(s: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Geodesic step ``cos(|w|) s + sin(|w|) w/|w|``; identity at w = 0."""
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=float)
    nrm = float(np.linalg.norm(w))
    if nrm == 0.0:
        return s.copy()
    out = np.cos(nrm) * s + np.sin(nrm) * (w / nrm)
    return out / np.linalg.norm(out)


def log_map_sphere(s: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """Inverse of :func:`exp_map_sphere`; rejects antipodal pairs."""
    s = np.asarray(s, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    c = float(np.clip(np.dot(s, s2), -1.0, 1.0))
    if c < -1.0 + 1e-12:
        raise ValueError("logarithmic map undefined for antipodal points")
    u = s2 - c * s
    nu = float(np.linalg.norm(u))
    theta = float(np.arccos(c))
    if nu < 1e-15 or theta < 1e-15:
        return np.zeros_like(s)
    return (theta / nu) * u


def orthant_retract(s: np.ndarray) -> np.ndarray:
    """Clamp negative entries to zero and renormalize to the unit sphere."""
    s = np.asarray(s, dtype=float)
    clipped = np.maximum(s, 0.0)
    nrm = float(np.linalg.norm(clipped))
    if nrm < 1e-300:
        raise ValueError("cannot retract an all-nonpositive vector onto the orthant")
    return clipped / nrm
