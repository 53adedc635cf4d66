"""Straight polylines against Akima splines on an office floor.

Both planners see the same waypoint samples (same seed), so the difference
in the worst turn of each path comes from the edge model alone.  The spline
paths are C1, so the worst turn on a densely sampled curve is much milder
than the kinks of a polyline.  An SVG of each batch is written to the
current directory.

    python demos/spline_smoothness.py
"""

import numpy as np

from gtmp import GoalSet, PlannerParams, min_cosine_similarity, plan, plan_akima, sample_spline
from gtmp.cli import generate_tasks
from gtmp.render import render_svg
from gtmp.worlds import office_map

world = office_map(128, 0.1)
task = generate_tasks(world, 1, seed=5)[0]
params = PlannerParams(M=4, N=40, H=10, B=16, seed=3)

straight = plan(world, task.start, GoalSet(task.goals), params)
spline = plan_akima(world, task.start, GoalSet(task.goals), params)


def worst_turns(res, dense):
    out = []
    for b in np.flatnonzero(res.feasible):
        pts = sample_spline(res.knots, res.spline_coeffs[b], 50) if dense else res.paths[b]
        out.append(min_cosine_similarity(pts))
    return np.array(out)


print("straight: %2d/%d feasible, mean worst-turn cosine %.3f"
      % (straight.feasible.sum(), straight.B, worst_turns(straight, False).mean()))
print("akima:    %2d/%d feasible, mean worst-turn cosine %.3f (sampled curve)"
      % (spline.feasible.sum(), spline.B, worst_turns(spline, True).mean()))
print("mean cost of feasible paths: straight %.2f, akima %.2f"
      % (straight.optimal_values[straight.feasible].mean(), spline.optimal_values[spline.feasible].mean()))

for name, res in (("straight", straight), ("akima", spline)):
    path = f"office_{name}.svg"
    with open(path, "w") as fh:
        fh.write(render_svg(world, res, task.start, task.goals))
    print("wrote", path)
