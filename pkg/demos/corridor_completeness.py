"""Completeness as the graph grows.

The hook corridor needs at least four straight segments between start and
goal, i.e. three waypoint layers.  With two layers no sample can ever help;
with three, the fraction of batch entries that find a path climbs towards one
as the layers get denser.

    python demos/corridor_completeness.py
"""

import numpy as np

from gtmp import GoalSet, PlannerParams, plan
from gtmp.worlds import hook_corridor

world, start, goal = hook_corridor()
goals = GoalSet(goal[None])

print("layers  waypoints  feasible")
for M in (2, 3, 4):
    for N in (10, 30, 100):
        res = plan(world, start, goals, PlannerParams(M, N, B=50, seed=1))
        print(f"{M:6d}  {N:9d}  {100 * res.feasible.mean():7.1f}%")

# the best entry of the densest run
res = plan(world, start, goals, PlannerParams(3, 100, B=50, seed=1))
best = int(np.argmin(res.optimal_values))
print("\nshortest path found (cost %.3f):" % res.optimal_values[best])
for q in res.paths[best]:
    print("   (%.2f, %.2f)" % tuple(q))
