"""Small head-to-head of the four BO methods on the projected Ackley
function over the 2-simplex, plus the regret plot.

This is a miniature of the benchmark protocol (fewer seeds and a smaller
budget); expect a couple of minutes of runtime.

Run:  python demos/04_bo_comparison.py   (writes bo_demo/ and regret.svg)
"""

from simplexbo import ExperimentPlan, plot_results, run_plan

plan = ExperimentPlan(
    objective="ackley",
    d=2,
    methods=("alpha0", "alpha_minus1", "eucl_simplex", "eucl_sphere"),
    budget=40,
    init_count=5,
    seeds=(0, 1, 2, 3, 4),
    out_dir="bo_demo",
    jobs=2,
)
out = run_plan(plan)
print("data csv:     ", out["data"])
print("aggregate csv:", out["aggregate"])
svg = plot_results(out["aggregate"], "regret.svg")
print("plot:         ", svg)

rows = out["aggregate_rows"]
final_iter = max(r[1] for r in rows)
print("\nmedian log10 regret at the final iteration:")
for method, it, _q25, median, _q75 in rows:
    if it == final_iter:
        print(f"  {method:14s} {median:7.3f}")
