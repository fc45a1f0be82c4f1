"""Experiment orchestration: plans, parallel runs, CSV output, plots.

A plan names an objective, the methods to compare, the budget and the seed
list.  ``run_plan`` executes every (method, seed) run — optionally on a
process pool — and writes

* ``data.csv``    — one row per evaluation:
  ``method,seed,iter,x_0..x_d,y,incumbent,regret,log10_regret,wall_s``
* ``aggregate.csv`` — per-iteration quantiles of log10 regret per method
* ``meta.yaml``   — the plan, objective metadata and exclusion counts

Row order is fixed by sorting on (method, seed, iter), so the files do not
depend on scheduling.  With ``SIMPLEXBO_DETERMINISTIC=1`` the wall-time
column is written as 0.0, making the data file byte-identical across
executions and worker counts.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .acquisition import AcqSpec, OptimizerConfig
from .bo import METHODS, MethodConfig, run_bo, simple_regret
from .kernels import DEFAULT_N_TRUNC, KernelSpec
from .objectives import make_objective

__all__ = [
    "DETERMINISTIC_ENV",
    "ExperimentPlan",
    "aggregate_quantiles",
    "plan_from_config",
    "plot_results",
    "run_plan",
]

DETERMINISTIC_ENV = "SIMPLEXBO_DETERMINISTIC"


def _deterministic() -> bool:
    return os.environ.get(DETERMINISTIC_ENV, "") == "1"


@dataclass(frozen=True)
class ExperimentPlan:
    objective: str
    d: int
    methods: tuple = METHODS
    budget: int = 100
    init_count: int = 5
    seeds: tuple = tuple(range(25))
    out_dir: str = "results"
    quantiles: tuple = (0.25, 0.5, 0.75)
    acq_kind: str = "ei"
    acq_beta: float = 2.0
    kernel_kind: str = "se"
    nu: float = 2.5
    n_trunc: int = DEFAULT_N_TRUNC
    jobs: int = 1
    f_opt: float | None = None
    objective_params: dict = field(default_factory=dict)
    optimizer_options: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "quantiles", tuple(float(q) for q in self.quantiles))
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if not all(0.0 < q < 1.0 for q in self.quantiles):
            raise ValueError("quantiles must lie strictly inside (0, 1)")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.kernel_kind not in ("se", "matern"):
            raise ValueError("kernel_kind must be 'se' or 'matern'")
        if self.budget < 1 or self.init_count < 1 or self.jobs < 1:
            raise ValueError("budget, init_count and jobs must be >= 1")

    def kernel_for(self, method: str) -> KernelSpec:
        prefix = "spherical" if method in ("alpha0", "alpha_minus1") else "euclid"
        family = f"{prefix}_{self.kernel_kind}"
        nu = math.inf if self.kernel_kind == "se" else self.nu
        return KernelSpec(
            family=family, kappa=1.0, sigma2=1.0, dim=self.d, nu=nu, n_trunc=self.n_trunc
        )

    def method_config(self, method: str, seed: int) -> MethodConfig:
        return MethodConfig(
            method=method,
            kernel=self.kernel_for(method),
            acq=AcqSpec(kind=self.acq_kind, beta=self.acq_beta),
            optimizer=OptimizerConfig(**self.optimizer_options),
            budget=self.budget,
            init_count=self.init_count,
            seed=seed,
        )


def plan_from_config(path, overrides: dict | None = None) -> ExperimentPlan:
    """Load a plan from a YAML mapping; ``overrides`` win over file values."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ValueError(f"config root must be a mapping, got {type(raw).__name__}")
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentPlan(**raw)


def _run_task(plan: ExperimentPlan, method: str, seed: int):
    objective = make_objective(plan.objective, plan.d, plan.objective_params)
    cfg = plan.method_config(method, seed)
    record = run_bo(objective.fn, plan.d, cfg)
    return method, seed, record


def run_plan(plan: ExperimentPlan) -> dict:
    """Execute all (method, seed) runs and write the result files.

    Returns a dict with the output paths and the aggregate rows.
    """
    spec = make_objective(plan.objective, plan.d, plan.objective_params)
    f_opt = plan.f_opt if plan.f_opt is not None else spec.optimum
    tasks = [(plan, m, s) for m in plan.methods for s in plan.seeds]
    if plan.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
            results = list(pool.map(_run_task_star, tasks))
    else:
        results = [_run_task(*t) for t in tasks]
    results.sort(key=lambda r: (r[0], r[1]))

    out_dir = Path(plan.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / "data.csv"
    agg_path = out_dir / "aggregate.csv"
    meta_path = out_dir / "meta.yaml"

    zero_wall = _deterministic()
    header = (
        ["method", "seed", "iter"]
        + [f"x_{i}" for i in range(plan.d + 1)]
        + ["y", "incumbent", "regret", "log10_regret", "wall_s"]
    )
    data_rows = []
    excluded: dict[str, int] = {}
    per_method_curves: dict[str, list[np.ndarray]] = {m: [] for m in plan.methods}
    for method, seed, record in results:
        if record.aborted:
            excluded[method] = excluded.get(method, 0) + 1
        if f_opt is None:
            regrets = np.full(len(record.rows), math.nan)
        else:
            regrets = simple_regret(record, f_opt)
        with np.errstate(divide="ignore"):
            lregrets = np.log10(regrets)
        for row, regret, lregret in zip(record.rows, regrets, lregrets):
            wall = 0.0 if zero_wall else row.wall_s
            data_rows.append(
                [method, str(seed), str(row.iteration)]
                + [repr(float(v)) for v in row.x]
                + [repr(float(row.y)), repr(float(row.incumbent)),
                   repr(float(regret)), repr(float(lregret)), repr(float(wall))]
            )
        if not record.aborted:
            per_method_curves[method].append(np.asarray(lregrets))

    with open(data_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(data_rows)

    agg_rows = aggregate_quantiles(per_method_curves, plan.quantiles)
    agg_header = ["method", "iter"] + _quantile_names(plan.quantiles)
    with open(agg_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(agg_header)
        for row in agg_rows:
            writer.writerow([row[0], str(row[1])] + [repr(v) for v in row[2:]])

    meta = {
        "plan": _plan_to_dict(plan),
        "objective": _plain(spec.metadata),
        "f_opt": f_opt,
        "excluded_runs": excluded,
        "deterministic": zero_wall,
        "sign_convention": "y is the maximized value; minimized benchmarks are negated",
    }
    with open(meta_path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(meta, fh, sort_keys=True)

    return {
        "data": data_path,
        "aggregate": agg_path,
        "meta": meta_path,
        "aggregate_rows": agg_rows,
        "records": results,
    }


def _run_task_star(args):
    return _run_task(*args)


def _plan_to_dict(plan: ExperimentPlan) -> dict:
    out = asdict(plan)
    out["methods"] = list(plan.methods)
    out["seeds"] = list(plan.seeds)
    out["quantiles"] = list(plan.quantiles)
    return _plain(out)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def _quantile_names(quantiles: tuple) -> list[str]:
    if tuple(quantiles) == (0.25, 0.5, 0.75):
        return ["q25", "median", "q75"]
    return [f"q{round(100 * q)}" for q in quantiles]


def aggregate_quantiles(per_method_curves: dict, quantiles: tuple) -> list[list]:
    """Per-iteration quantiles of log10 regret across seeds, per method."""
    rows = []
    for method in sorted(per_method_curves):
        curves = per_method_curves[method]
        if not curves:
            continue
        stacked = np.vstack(curves)
        for it in range(stacked.shape[1]):
            vals = stacked[:, it]
            qs = [float(np.quantile(vals, q)) for q in quantiles]
            rows.append([method, it] + qs)
    return rows


def plot_results(aggregate_csv, out_path) -> Path:
    """Render the aggregate regret curves to a vector-graphics (SVG) file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(aggregate_csv, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError("empty aggregate file")
        rows = list(reader)
    if not rows:
        raise ValueError("aggregate file has no data rows")
    n_q = len(header) - 2
    series: dict[str, dict[str, list]] = {}
    for row in rows:
        method = row[0]
        entry = series.setdefault(method, {"iter": [], "qs": [[] for _ in range(n_q)]})
        entry["iter"].append(int(row[1]))
        for j in range(n_q):
            entry["qs"][j].append(float(row[2 + j]))

    out_path = Path(out_path)
    with plt.rc_context({"svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for method in sorted(series):
            entry = series[method]
            its = np.array(entry["iter"])
            qs = [np.array(col) for col in entry["qs"]]
            mid = qs[len(qs) // 2] if n_q % 2 == 1 else qs[0]
            finite = np.isfinite(mid)
            line, = ax.plot(its[finite], mid[finite], label=method)
            line.set_gid(f"line-{method}")
            if n_q >= 3:
                lo, hi = qs[0], qs[-1]
                band_ok = np.isfinite(lo) & np.isfinite(hi)
                band = ax.fill_between(
                    its[band_ok], lo[band_ok], hi[band_ok],
                    alpha=0.25, color=line.get_color(),
                )
                band.set_gid(f"band-{method}")
        ax.set_xlabel("N")
        ax.set_ylabel("log10 regret")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out_path, format="svg")
        plt.close(fig)
    return out_path
