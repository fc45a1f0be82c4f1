"""Wiring an external process as the objective.

The child receives one line on stdin — the d+1 coordinates as decimal text
with 17 significant digits — and must print one number.  Here the "expensive
simulator" is a tiny inline Python script scoring closeness to a secret
mixture.

Run:  python demos/05_external_objective.py
"""

import shlex
import sys

import numpy as np

from simplexbo import ExperimentPlan, run_plan
from simplexbo.objectives import external_objective

child = (
    "import sys;"
    "vals = [float(t) for t in sys.stdin.readline().split()];"
    "secret = [0.6, 0.25, 0.15];"
    "print(-sum((a - b) ** 2 for a, b in zip(vals, secret)))"
)
cmd = f"{shlex.quote(sys.executable)} -c {shlex.quote(child)}"

objective = external_objective(cmd, timeout=10.0)
print("one evaluation:", objective(np.array([0.5, 0.3, 0.2])))

plan = ExperimentPlan(
    objective="external",
    d=2,
    methods=("eucl_simplex",),
    budget=15,
    init_count=5,
    seeds=(0,),
    out_dir="external_demo",
    jobs=1,
    f_opt=0.0,
    objective_params={"cmd": cmd, "timeout": 10.0},
)
out = run_plan(plan)
_, _, record = out["records"][0]
print("best mixture found:", np.round(record.recommendation_x, 4))
print("best score:        ", record.recommendation_y)
