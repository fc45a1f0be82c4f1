"""Benchmark objectives on the simplex and the subprocess objective bridge.

Classic test functions (Ackley, Rosenbrock, Griewank) are represented on the
tangent space at a base point — the simplex center by default — and composed
with the logarithmic map, so their optimum sits exactly at the base point.
Tangent coordinates are taken in a Fisher-orthonormal basis and scaled so
the farthest simplex point maps to the function's conventional evaluation
radius.

``external_objective`` wires an arbitrary executable as an objective: one
evaluation writes the coordinates as one line of decimal text to the child's
stdin and reads one number back from its stdout.
"""

from __future__ import annotations

import math
import shlex
import subprocess
from dataclasses import dataclass

import numpy as np

from .bo import ObjectiveError
from .simplex import (
    ensure_interior,
    fisher_distance,
    fisher_inner,
    log_map_alpha0,
    tangent_project,
)

__all__ = [
    "BENCHMARK_RADII",
    "ExternalProcessFailed",
    "ExternalReplyMalformed",
    "ExternalTimeout",
    "ObjectiveSpec",
    "ProjectedBenchmark",
    "ackley",
    "external_objective",
    "griewank",
    "make_objective",
    "planted_objective",
    "projected_benchmark",
    "rosenbrock",
    "simplex_center",
    "tangent_basis",
]

# Conventional evaluation radii of the classic benchmarks.
BENCHMARK_RADII = {"ackley": 32.768, "rosenbrock": 2.048, "griewank": 600.0}


def simplex_center(d: int) -> np.ndarray:
    return np.full(d + 1, 1.0 / (d + 1))


def tangent_basis(c: np.ndarray) -> np.ndarray:
    """Fisher-orthonormal tangent basis at an interior point, shape (d, d+1).

    Gram-Schmidt (in the Fisher inner product at ``c``) applied to the
    tangent projections of the first d canonical basis vectors; ordering is
    deterministic.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0.0):
        raise ValueError("tangent basis requires an interior base point")
    d = c.size - 1
    basis = []
    for i in range(d):
        e = np.zeros(d + 1)
        e[i] = 1.0
        v = tangent_project(c, e)
        for b in basis:
            v = v - fisher_inner(c, v, b) * b
        nrm = math.sqrt(fisher_inner(c, v, v))
        if nrm < 1e-12:
            raise ValueError("canonical directions became degenerate at this base point")
        basis.append(v / nrm)
    return np.array(basis)


def ackley(z: np.ndarray) -> float:
    z = np.asarray(z, dtype=float)
    return float(
        -20.0 * np.exp(-0.2 * np.sqrt(np.mean(z**2)))
        - np.exp(np.mean(np.cos(2.0 * np.pi * z)))
        + 20.0
        + math.e
    )


def rosenbrock(z: np.ndarray) -> float:
    z = np.asarray(z, dtype=float)
    if z.size < 2:
        raise ValueError("rosenbrock needs at least two coordinates")
    return float(np.sum(100.0 * (z[1:] - z[:-1] ** 2) ** 2 + (1.0 - z[:-1]) ** 2))


def griewank(z: np.ndarray) -> float:
    z = np.asarray(z, dtype=float)
    i = np.arange(1, z.size + 1, dtype=float)
    return float(np.sum(z**2) / 4000.0 - np.prod(np.cos(z / np.sqrt(i))) + 1.0)


_BENCH_FNS = {"ackley": ackley, "rosenbrock": rosenbrock, "griewank": griewank}


@dataclass(frozen=True)
class ProjectedBenchmark:
    """A classic benchmark represented in tangent coordinates at ``base``.

    ``scale`` converts Fisher arc length into benchmark coordinates; the
    Rosenbrock optimum is shifted to the origin by evaluating at z + 1.
    The function is minimized with minimum 0 at ``base``.
    """

    kind: str
    d: int
    base: np.ndarray
    basis: np.ndarray
    scale: float

    def __call__(self, x: np.ndarray) -> float:
        x = ensure_interior(np.asarray(x, dtype=float))
        eta = log_map_alpha0(self.base, x)
        z = self.scale * (self.basis @ (self.base * eta))
        if self.kind == "rosenbrock":
            z = z + 1.0
        return _BENCH_FNS[self.kind](z)


def projected_benchmark(
    kind: str,
    d: int,
    base: np.ndarray | None = None,
    scale: float | None = None,
) -> ProjectedBenchmark:
    if kind not in _BENCH_FNS:
        raise ValueError(f"unknown benchmark {kind!r}")
    if kind == "rosenbrock" and d < 2:
        raise ValueError("rosenbrock needs dimension >= 2")
    c = simplex_center(d) if base is None else np.asarray(base, dtype=float)
    if scale is None:
        # farthest simplex point from the center is a vertex
        max_arc = 2.0 * math.acos(math.sqrt(float(np.min(c))))
        scale = BENCHMARK_RADII[kind] / max_arc
    return ProjectedBenchmark(kind=kind, d=d, base=c, basis=tangent_basis(c), scale=scale)


def planted_objective(target: np.ndarray):
    """Negative squared Fisher-Rao distance to a planted mixture (max at 0)."""
    target = np.asarray(target, dtype=float)

    def objective(x: np.ndarray) -> float:
        return -fisher_distance(x, target) ** 2

    return objective


class ExternalTimeout(ObjectiveError):
    pass


class ExternalProcessFailed(ObjectiveError):
    pass


class ExternalReplyMalformed(ObjectiveError):
    pass


def external_objective(cmd: str, timeout: float = 60.0):
    """Wrap a command line as an objective ``simplex point -> float``.

    Per evaluation the command is spawned once; the d+1 coordinates are
    written to its stdin as one space-separated line with 17 significant
    digits, and one decimal number is read from its stdout.
    """
    argv = shlex.split(cmd)
    if not argv:
        raise ValueError("empty command line")

    def objective(x: np.ndarray) -> float:
        line = " ".join("%.17g" % v for v in np.asarray(x, dtype=float)) + "\n"
        try:
            proc = subprocess.run(
                argv, input=line, capture_output=True, text=True, timeout=timeout
            )
        except subprocess.TimeoutExpired as exc:
            raise ExternalTimeout(f"objective timed out after {timeout}s") from exc
        except OSError as exc:
            raise ExternalProcessFailed(f"could not spawn {argv[0]!r}: {exc}") from exc
        if proc.returncode != 0:
            raise ExternalProcessFailed(
                f"objective exited with status {proc.returncode}: {proc.stderr.strip()!r}"
            )
        tokens = proc.stdout.split()
        if not tokens:
            raise ExternalReplyMalformed("objective produced no output")
        try:
            return float(tokens[0])
        except ValueError as exc:
            raise ExternalReplyMalformed(f"non-numeric reply {tokens[0]!r}") from exc

    return objective


@dataclass(frozen=True)
class ObjectiveSpec:
    """A named objective in maximization form plus its known optimum (if any)."""

    name: str
    fn: object
    d: int
    optimum: float | None
    metadata: dict


def make_objective(name: str, d: int, params: dict | None = None) -> ObjectiveSpec:
    """Build a registry objective; benchmark functions are negated for
    maximization, so their known optimum value is 0."""
    params = dict(params or {})
    if name in _BENCH_FNS:
        bench = projected_benchmark(name, d, scale=params.pop("scale", None))
        if params:
            raise ValueError(f"unknown parameters {sorted(params)} for {name!r}")
        fn = lambda x, _b=bench: -_b(x)
        meta = {"kind": name, "scale": bench.scale, "minimized_original": True}
        return ObjectiveSpec(name=name, fn=fn, d=d, optimum=0.0, metadata=meta)
    if name == "planted":
        target = params.pop("target", None)
        if params:
            raise ValueError(f"unknown parameters {sorted(params)} for 'planted'")
        target = simplex_center(d) if target is None else np.asarray(target, dtype=float)
        if target.size != d + 1:
            raise ValueError("planted target has the wrong dimension")
        return ObjectiveSpec(
            name=name,
            fn=planted_objective(target),
            d=d,
            optimum=0.0,
            metadata={"kind": "planted", "target": target.tolist()},
        )
    if name == "external":
        cmd = params.pop("cmd", None)
        timeout = float(params.pop("timeout", 60.0))
        optimum = params.pop("f_opt", None)
        if cmd is None:
            raise ValueError("external objective needs a 'cmd' parameter")
        if params:
            raise ValueError(f"unknown parameters {sorted(params)} for 'external'")
        return ObjectiveSpec(
            name=name,
            fn=external_objective(cmd, timeout=timeout),
            d=d,
            optimum=None if optimum is None else float(optimum),
            metadata={"kind": "external", "cmd": cmd, "timeout": timeout},
        )
    raise ValueError(f"unknown objective {name!r}")
