"""How different are the paths of one batch?

Each batch entry is an independent random graph, so the traced paths spread
over the homotopy classes the layers can reach.  Path diversity is the mean
pairwise Sinkhorn distance between paths viewed as point clouds; it grows
when entries take different doors or go around pillars on different sides.

    python demos/batch_diversity.py
"""

import numpy as np

from gtmp import GoalSet, PlannerParams, path_diversity, plan, sinkhorn_distance
from gtmp.cli import generate_tasks
from gtmp.worlds import office_map

world = office_map(128, 0.1)
task = generate_tasks(world, 1, seed=2)[0]

print("waypoints  feasible  path diversity")
for N in (5, 20, 80):
    res = plan(world, task.start, GoalSet(task.goals), PlannerParams(M=3, N=N, B=12, seed=0))
    ok = res.paths[res.feasible]
    pd = path_diversity(list(ok), lam=1e-2) if len(ok) >= 2 else float("nan")
    print(f"{N:9d}  {len(ok):5d}/12  {pd:14.3f}")

# the two most different paths of the last batch
if len(ok) >= 2:
    d = np.array([[sinkhorn_distance(p, q, lam=1e-2) for q in ok] for p in ok])
    i, j = np.unravel_index(np.argmax(d), d.shape)
    print("\nmost distant pair: entries %d and %d, distance %.3f" % (i, j, d[i, j]))
