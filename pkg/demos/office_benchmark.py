"""End-to-end benchmark through the command line interface.

Writes an office map and a task file to a scratch directory, plans every
task, runs a small (M, N) sweep on the first one and renders the first plan.
The same steps can be run by hand with the ``gtmp`` command.

    python demos/office_benchmark.py [workdir]
"""

import os
import sys
import tempfile

from gtmp.cli import main
from gtmp.config_space import save_grid_world
from gtmp.worlds import office_map

work = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="gtmp-")
os.makedirs(work, exist_ok=True)
world_json = os.path.join(work, "office.json")
tasks_json = os.path.join(work, "tasks.json")
save_grid_world(world_json, office_map(256, 0.05).geometry)

steps = [
    ["gen-tasks", "--world", world_json, "--count", "10", "--seed", "4", "--out", tasks_json],
    ["plan", "--tasks", tasks_json, "--M", "3", "--N", "40", "--B", "8", "--out", os.path.join(work, "plan")],
    ["sweep", "--tasks", tasks_json, "--M", "2:4", "--N", "10,40", "--B", "8", "--out", os.path.join(work, "sweep")],
    ["render", "--plan", os.path.join(work, "plan", "plan_0.json"), "--out", os.path.join(work, "plan_0.svg")],
]
for argv in steps:
    print("$ gtmp " + " ".join(argv))
    code = main(argv)
    if code:
        sys.exit(code)

with open(os.path.join(work, "plan", "metrics.csv")) as fh:
    print(fh.read())
print("outputs in", work)
