"""Command-line front door: run plans, plot results, evaluate objectives.

Subcommands:

* ``run``      — execute an experiment plan (config file and/or flags).
* ``plot``     — render an aggregate CSV to an SVG regret plot.
* ``eval``     — evaluate one objective at one point (debugging aid).
* ``selftest`` — quick invariant suite; nonzero exit on failure.
"""

from __future__ import annotations

import argparse
import os
import sys


def _parse_seeds(text: str):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) == 1 and ":" not in parts[0]:
        n = int(parts[0])
        # a single number means "this many seeds", matching the usual
        # "25 seeds" protocol; use an explicit list for specific seeds
        return tuple(range(n))
    return tuple(int(p) for p in parts)


def _parse_point(text: str):
    import numpy as np

    return np.array([float(p) for p in text.split(",") if p.strip()])


def _add_plan_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML plan file; flags override its values")
    p.add_argument("--objective", help="ackley | rosenbrock | griewank | planted | external")
    p.add_argument("--dim", type=int, help="intrinsic simplex dimension d")
    p.add_argument("--methods", help="comma-separated subset of "
                                     "alpha0,alpha_minus1,eucl_simplex,eucl_sphere")
    p.add_argument("--budget", type=int, help="BO iterations per run")
    p.add_argument("--init", type=int, help="random initial samples per run")
    p.add_argument("--seeds", help="seed list '0,1,2' or a count '25'")
    p.add_argument("--acq", choices=("ei", "lcb"), help="acquisition function")
    p.add_argument("--beta", type=float, help="LCB exploration weight")
    p.add_argument("--kernel", choices=("se", "matern"), help="kernel kind per method family")
    p.add_argument("--nu", type=float, help="Matern smoothness (0.5, 1.5 or 2.5)")
    p.add_argument("--trunc", type=int, help="spherical series truncation")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    p.add_argument("--fopt", type=float, help="known optimum (maximization form)")
    p.add_argument("--scale", type=float, help="benchmark tangent-coordinate scale")
    p.add_argument("--cmd", help="external objective command line")
    p.add_argument("--timeout", type=float, help="external objective timeout (s)")


def _plan_overrides(args) -> dict:
    over = {
        "objective": args.objective,
        "d": args.dim,
        "budget": args.budget,
        "init_count": args.init,
        "acq_kind": args.acq,
        "acq_beta": args.beta,
        "kernel_kind": args.kernel,
        "nu": args.nu,
        "n_trunc": args.trunc,
        "out_dir": args.out,
        "jobs": args.jobs,
        "f_opt": args.fopt,
    }
    if args.methods is not None:
        over["methods"] = tuple(m for m in args.methods.split(",") if m)
    if args.seeds is not None:
        over["seeds"] = _parse_seeds(args.seeds)
    params = {}
    if args.scale is not None:
        params["scale"] = args.scale
    if args.cmd is not None:
        params["cmd"] = args.cmd
    if args.timeout is not None:
        params["timeout"] = args.timeout
    if params:
        over["objective_params"] = params
    return over


def _cmd_run(args) -> int:
    from .harness import ExperimentPlan, plan_from_config, run_plan

    overrides = _plan_overrides(args)
    if args.config:
        plan = plan_from_config(args.config, overrides)
    else:
        filtered = {k: v for k, v in overrides.items() if v is not None}
        if "objective" not in filtered or "d" not in filtered:
            print("run requires --objective and --dim (or a --config file)", file=sys.stderr)
            return 2
        plan = ExperimentPlan(**filtered)
    out = run_plan(plan)
    print(f"wrote {out['data']}")
    print(f"wrote {out['aggregate']}")
    print(f"wrote {out['meta']}")
    return 0


def _cmd_plot(args) -> int:
    from .harness import plot_results

    path = plot_results(args.data, args.out)
    print(f"wrote {path}")
    return 0


def _cmd_eval(args) -> int:
    from .objectives import make_objective

    params = {}
    if args.scale is not None:
        params["scale"] = args.scale
    if args.cmd is not None:
        params["cmd"] = args.cmd
    if args.timeout is not None:
        params["timeout"] = args.timeout
    spec = make_objective(args.objective, args.dim, params)
    x = _parse_point(args.point)
    if x.size != args.dim + 1:
        print(f"point has {x.size} coordinates, expected {args.dim + 1}", file=sys.stderr)
        return 2
    print(repr(spec.fn(x)))
    return 0


def _cmd_selftest(_args) -> int:
    failures = 0
    for name, ok, detail in _selftest_checks():
        print(f"{'PASS' if ok else 'FAIL'} {name}{'' if ok else ': ' + detail}")
        failures += 0 if ok else 1
    return 1 if failures else 0


def _selftest_checks():
    import numpy as np

    from . import kernels, simplex, sphere
    from .gp import Dataset, condition, posterior_moments

    checks = []
    rng = np.random.default_rng(0)

    def run(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except Exception as exc:  # pragma: no cover - only on defect
            checks.append((name, False, f"{type(exc).__name__}: {exc}"))

    def isometry():
        for _ in range(200):
            x = simplex.sample_uniform(rng, 3)
            x2 = simplex.sample_uniform(rng, 3)
            lhs = simplex.fisher_norm(x, simplex.log_map_alpha0(x, x2))
            rhs = simplex.fisher_distance(x, x2)
            assert abs(lhs - rhs) <= 1e-9, (lhs, rhs)

    def roundtrip():
        for _ in range(200):
            x = simplex.ensure_interior(simplex.sample_uniform(rng, 4), 1e-6)
            x2 = simplex.ensure_interior(simplex.sample_uniform(rng, 4), 1e-6)
            back = simplex.exp_map(x, simplex.log_map_alpha0(x, x2), 0)
            assert np.max(np.abs(back - x2)) <= 1e-8

    def interior():
        for _ in range(200):
            x = simplex.sample_uniform(rng, 4)
            eta = simplex.tangent_project(x, rng.uniform(-50, 50, 5))
            out = simplex.exp_map(x, eta, -1)
            assert np.all(out > 0) and abs(out.sum() - 1.0) <= 1e-12

    def kernel_psd():
        spec = kernels.KernelSpec(family="spherical_se", kappa=0.5, sigma2=2.0, dim=3)
        pts = np.array([np.sqrt(simplex.sample_uniform(rng, 3)) for _ in range(30)])
        g = kernels.gram(pts, spec, domain="sphere")
        eig = np.linalg.eigvalsh(g.values)
        assert eig.min() >= -1e-8 * eig.max()
        assert abs(kernels.sphere_kernel(pts[0], pts[0], spec) - 2.0) <= 1e-10

    def gp_interpolates():
        spec = kernels.KernelSpec(family="spherical_se", kappa=0.7, sigma2=1.0, dim=2)
        X = np.array([np.sqrt(simplex.sample_uniform(rng, 2)) for _ in range(8)])
        y = np.sin(3.0 * X[:, 0])
        post = condition(Dataset(X, y, 0.0, "sphere"), spec)
        for i in range(len(y)):
            mean, var = posterior_moments(post, X[i])
            assert abs(mean - y[i]) <= 1e-6 and var <= 1e-8

    def ei_value():
        from .acquisition import ei

        assert abs(ei(0.0, 1.0, 0.0) - 1.0 / np.sqrt(2.0 * np.pi)) <= 1e-12

    def projection():
        out = simplex.project_to_simplex(np.array([0.5, 0.5, 0.5]))
        assert np.max(np.abs(out - 1.0 / 3.0)) <= 1e-12

    def blend():
        cols = np.array([[0.2, 0.7], [0.8, 0.3]])
        wm = simplex.WeightMatrix(cols, np.array([0.0, 1.0]), np.array([0.5, 0.5]))
        out = simplex.blend_weights(wm, 0.4)
        assert abs(out.sum() - 1.0) <= 1e-12

    def sphere_ops():
        s = np.array([1.0, 0.0, 0.0])
        s2 = np.array([0.0, 1.0, 0.0])
        assert abs(sphere.geodesic_distance(s, s2) - np.pi / 2) <= 1e-12
        w = sphere.log_map_sphere(s, s2)
        assert np.max(np.abs(sphere.exp_map_sphere(s, w) - s2)) <= 1e-10

    run("isometry(log norm = Fisher distance)", isometry)
    run("exp/log roundtrip (alpha=0)", roundtrip)
    run("interior preservation (alpha=-1)", interior)
    run("kernel PSD + normalization", kernel_psd)
    run("GP noiseless interpolation", gp_interpolates)
    run("EI closed form at z=0", ei_value)
    run("simplex projection", projection)
    run("weight blend sums to one", blend)
    run("sphere exp/log", sphere_ops)
    return checks


def main(argv=None) -> int:
    # cap BLAS threads before heavy imports: runs are parallel at the
    # process level and per-run matrices are small
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, "1")

    parser = argparse.ArgumentParser(prog="simplexbo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment plan")
    _add_plan_flags(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_plot = sub.add_parser("plot", help="plot an aggregate CSV")
    p_plot.add_argument("--data", required=True, help="aggregate CSV path")
    p_plot.add_argument("--out", required=True, help="output SVG path")
    p_plot.set_defaults(fn=_cmd_plot)

    p_eval = sub.add_parser("eval", help="evaluate an objective at a point")
    p_eval.add_argument("--objective", required=True)
    p_eval.add_argument("--dim", type=int, required=True)
    p_eval.add_argument("--point", required=True, help="comma-separated d+1 coordinates")
    p_eval.add_argument("--scale", type=float)
    p_eval.add_argument("--cmd")
    p_eval.add_argument("--timeout", type=float)
    p_eval.set_defaults(fn=_cmd_eval)

    p_self = sub.add_parser("selftest", help="run the quick invariant suite")
    p_self.set_defaults(fn=_cmd_selftest)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
