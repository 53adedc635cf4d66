"""Benchmark harness: batch planning, the (M, N) ablation sweep, SVG overlays
and task generation.

    gtmp gen-tasks --world map.json --count 100 --seed 0 --out tasks.json
    gtmp plan --world map.json --tasks tasks.json --M 3 --N 100 --B 100 --out runs/
    gtmp sweep --world map.json --tasks tasks.json --M 2:6 --N 10,50,100 --B 200 --repetitions 5 --out sweep/
    gtmp render --world map.json --plan runs/plan_0.json --out plan_0.svg

Exit codes: 0 success, 1 no feasible path in any planned batch, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .akima import plan_akima
from .config_space import World, load_world
from .graph import GoalSet, PlannerParams
from .metrics import DEFAULT_LAMBDA, SinkhornNotConverged, batch_min_cosim, path_diversity
from .planner import PlanningInputError, plan
from .render import render_svg

log = logging.getLogger("gtmp")

METRICS_SCHEMA = "gtmp-metrics v1"
SWEEP_SCHEMA = "gtmp-sweep v1"
METRIC_COLUMNS = ["task_id", "planner", "CF_percent", "min_cosim_mean", "PD", "plan_time_ms"]
SWEEP_COLUMNS = ["M", "N", "repetition"] + METRIC_COLUMNS
# Minimum start-goal distance of generated tasks, as a fraction of the diagonal.
TASK_SEPARATION = 0.25

EXIT_OK, EXIT_NO_FEASIBLE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class Task:
    start: np.ndarray
    goals: np.ndarray


# ---------------------------------------------------------------------------
# loading


def open_world(path: str, margin: float | None = None) -> World:
    try:
        world = load_world(path)
        if margin is not None:
            world = World(world.limits, world.geometry, margin)
    except (OSError, ValueError, KeyError, TypeError) as err:
        raise InputError(f"cannot load world {path!r}: {err}") from err
    return world


def load_tasks(path: str) -> tuple[list[Task], dict]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        tasks = [Task(np.asarray(t["start"], dtype=float), np.atleast_2d(np.asarray(t["goals"], dtype=float))) for t in doc["tasks"]]
    except (OSError, ValueError, KeyError, TypeError) as err:
        raise InputError(f"cannot load tasks {path!r}: {err}") from err
    if not tasks:
        raise InputError(f"task file {path!r} contains no tasks")
    return tasks, doc


def resolve_world_path(args, tasks_doc: dict | None, tasks_path: str | None) -> str:
    if args.world:
        return args.world
    if tasks_doc and tasks_doc.get("world"):
        ref = tasks_doc["world"]
        if not os.path.isabs(ref):
            ref = os.path.join(os.path.dirname(os.path.abspath(tasks_path)), ref)
        return ref
    raise InputError("no world given (use --world or a task file with a 'world' entry)")


def parse_int_list(text: str) -> list[int]:
    """``"3"``, ``"2,5,9"`` or an inclusive range ``"2:20"`` / ``"10:100:10"``."""
    out = []
    try:
        for part in text.split(","):
            if ":" in part:
                bits = [int(b) for b in part.split(":")]
                if len(bits) not in (2, 3):
                    raise ValueError(part)
                lo, hi = bits[0], bits[1]
                step = bits[2] if len(bits) == 3 else 1
                if step < 1:
                    raise ValueError(part)
                out.extend(range(lo, hi + 1, step))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}")
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"integer list {text!r} must be non-empty and positive")
    return out


# ---------------------------------------------------------------------------
# running


def run_planner(world: World, task: Task, params: PlannerParams, planner: str):
    fn = plan_akima if planner == "akima" else plan
    try:
        return fn(world, task.start, GoalSet(task.goals), params)
    except (PlanningInputError, ValueError) as err:
        raise InputError(str(err)) from err


def batch_metrics(result, lam: float) -> dict:
    """CF%, Min Cosim and PD over the feasible subset of one batch."""
    feasible = np.asarray(result.feasible, dtype=bool)
    cf = 100.0 * float(feasible.mean())
    cosim = batch_min_cosim(result.paths, feasible)
    pd = float("nan")
    if feasible.sum() >= 2:
        try:
            pd = path_diversity(list(result.paths[feasible]), lam)
        except SinkhornNotConverged as err:
            log.warning("path diversity unavailable: %s", err)
    return {"CF_percent": cf, "min_cosim_mean": cosim, "PD": pd, "plan_time_ms": 1e3 * result.plan_time}


def run_task(world: World, task: Task, task_id: int, params: PlannerParams, planner: str, lam: float):
    """Plan one task's batch; returns (metrics row, plan result).

    Task ``i`` draws batch entries ``i*B .. i*B+B-1`` of the seed's stream, so
    tasks never share waypoints.
    """
    params = PlannerParams(params.M, params.N, params.H, params.B, params.seed, task_id * params.B)
    result = run_planner(world, task, params, planner)
    row = {"task_id": task_id, "planner": planner}
    row.update(batch_metrics(result, lam))
    return row, result


def _cell(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def format_rows(rows: list[dict], columns: list[str], schema: str, fmt: str) -> str:
    if fmt == "json":
        clean = [{c: (None if isinstance(r[c], float) and math.isnan(r[c]) else r[c]) for c in columns} for r in rows]
        return json.dumps({"schema": schema, "rows": clean}, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# {schema}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def write_report(text: str, out_dir: str | None, stem: str, fmt: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, f"{stem}.{fmt}"), "w") as fh:
        fh.write(text)


def plan_document(result, task: Task, task_id: int, params: PlannerParams, planner: str, world_path: str) -> dict:
    doc = result.to_dict()
    doc.update(
        task_id=task_id,
        planner=planner,
        world=os.path.abspath(world_path),
        start=task.start.tolist(),
        goals=task.goals.tolist(),
        params={"M": params.M, "N": params.N, "H": params.H, "B": params.B, "seed": params.seed},
    )
    return doc


def params_from_args(args, M: int, N: int, seed: int) -> PlannerParams:
    try:
        return PlannerParams(M=M, N=N, H=args.H, B=args.B, seed=seed)
    except ValueError as err:
        raise InputError(str(err)) from err


def cmd_plan(args) -> int:
    tasks, doc = load_tasks(args.tasks)
    world_path = resolve_world_path(args, doc, args.tasks)
    world = open_world(world_path, args.margin)
    params = params_from_args(args, args.M, args.N, args.seed)
    rows, any_feasible = [], False
    for i, task in enumerate(tasks):
        row, result = run_task(world, task, i, params, args.planner, args.lam)
        rows.append(row)
        any_feasible |= bool(result.feasible.any())
        if args.out is not None:
            os.makedirs(args.out, exist_ok=True)
            with open(os.path.join(args.out, f"plan_{i}.json"), "w") as fh:
                json.dump(plan_document(result, task, i, params, args.planner, world_path), fh)
    write_report(format_rows(rows, METRIC_COLUMNS, METRICS_SCHEMA, args.format), args.out, "metrics", args.format)
    return EXIT_OK if any_feasible else EXIT_NO_FEASIBLE


def cmd_sweep(args) -> int:
    tasks, doc = load_tasks(args.tasks)
    world_path = resolve_world_path(args, doc, args.tasks)
    world = open_world(world_path, args.margin)
    if not 0 <= args.task < len(tasks):
        raise InputError(f"task index {args.task} out of range (file has {len(tasks)} tasks)")
    if args.repetitions < 1:
        raise InputError("--repetitions must be at least 1")
    task = tasks[args.task]
    rows, any_feasible = [], False
    for M in args.M:
        for N in args.N:
            for rep in range(args.repetitions):
                # repetition r uses seed + r, so a 1x1 sweep reproduces `plan`
                params = params_from_args(args, M, N, args.seed + rep)
                row, result = run_task(world, task, args.task, params, args.planner, args.lam)
                row.update(M=M, N=N, repetition=rep)
                rows.append(row)
                any_feasible |= bool(result.feasible.any())
                log.info("M=%d N=%d rep=%d CF=%.1f%%", M, N, rep, row["CF_percent"])
    write_report(format_rows(rows, SWEEP_COLUMNS, SWEEP_SCHEMA, args.format), args.out, "sweep", args.format)
    return EXIT_OK if any_feasible else EXIT_NO_FEASIBLE


def cmd_render(args) -> int:
    from .planner import PlanResult

    try:
        with open(args.plan) as fh:
            doc = json.load(fh)
        result = PlanResult.from_dict(doc)
    except (OSError, ValueError, KeyError, TypeError) as err:
        raise InputError(f"cannot load plan {args.plan!r}: {err}") from err
    world_path = args.world or doc.get("world")
    if not world_path:
        raise InputError("no world given (use --world)")
    world = open_world(world_path, args.margin)
    if world.dim != 2:
        raise InputError("render supports 2-D worlds only")
    start = doc.get("start")
    goals = doc.get("goals")
    svg = render_svg(world, result, start, goals, width=args.width)
    if args.out is None:
        sys.stdout.write(svg)
    else:
        parent = os.path.dirname(os.path.abspath(args.out))
        os.makedirs(parent, exist_ok=True)
        with open(args.out, "w") as fh:
            fh.write(svg)
    return EXIT_OK


def generate_tasks(world: World, count: int, seed: int, num_goals: int = 1, max_tries: int = 100000) -> list[Task]:
    """Rejection-sample free start/goal sets with every goal at least
    ``TASK_SEPARATION`` of the diagonal away from the start."""
    rng = np.random.default_rng(seed)
    lim = world.limits
    min_sep = TASK_SEPARATION * lim.diagonal
    span = lim.upper - lim.lower

    def draw():
        for _ in range(max_tries):
            q = lim.lower + span * rng.random(lim.dim)
            if not world.in_collision(q):
                return q
        raise InputError("could not sample a free configuration")

    tasks = []
    for _ in range(count):
        start = draw()
        goals = []
        tries = 0
        while len(goals) < num_goals:
            g = draw()
            tries += 1
            if tries > max_tries:
                raise InputError("could not sample goals far enough from the start")
            if np.linalg.norm(g - start) >= min_sep:
                goals.append(g)
        tasks.append(Task(start, np.array(goals)))
    return tasks


def cmd_gen_tasks(args) -> int:
    world = open_world(args.world, args.margin)
    if args.count < 1 or args.goals < 1:
        raise InputError("--count and --goals must be at least 1")
    tasks = generate_tasks(world, args.count, args.seed, args.goals)
    doc = {
        "world": os.path.abspath(args.world),
        "seed": args.seed,
        "tasks": [{"start": t.start.tolist(), "goals": t.goals.tolist()} for t in tasks],
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        parent = os.path.dirname(os.path.abspath(args.out))
        os.makedirs(parent, exist_ok=True)
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_world(p, required=True):
    p.add_argument("--world", required=required, help="world JSON (grid sidecar or primitives)")
    p.add_argument("--margin", type=float, default=None, help="override the world's margin_delta")


def _add_planning(p, multi: bool):
    int_arg = parse_int_list if multi else int
    p.add_argument("--tasks", required=True, help="task set JSON")
    p.add_argument("--M", type=int_arg, required=True, help="number of layers" + (" (list or a:b[:s])" if multi else ""))
    p.add_argument("--N", type=int_arg, required=True, help="waypoints per layer" + (" (list or a:b[:s])" if multi else ""))
    p.add_argument("--H", type=int, default=10, help="collision probes per edge (default 10)")
    p.add_argument("--B", type=int, default=100, help="paths per batch (default 100)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--planner", choices=("straight", "akima"), default="straight")
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA, help="Sinkhorn regularization for PD")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output directory (default: report on stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtmp", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan a batch per task and report metrics")
    _add_world(p, required=False)
    _add_planning(p, multi=False)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", help="(M, N) ablation sweep on one task")
    _add_world(p, required=False)
    _add_planning(p, multi=True)
    p.add_argument("--task", type=int, default=0, help="index of the task in the task file")
    p.add_argument("--repetitions", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("render", help="SVG overlay of a saved plan")
    _add_world(p, required=False)
    p.add_argument("--plan", required=True, help="plan JSON written by `plan`")
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--out", default=None, help="SVG file (default: stdout)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gen-tasks", help="sample start/goal tasks in a world")
    _add_world(p)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--goals", type=int, default=1, help="goals per task")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="task JSON (default: stdout)")
    p.set_defaults(func=cmd_gen_tasks)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as err:
        print(f"gtmp: error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
