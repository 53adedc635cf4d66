"""Batched global planning on the random multipartite graph.

All quantities carry a leading batch axis ``B``.  For ``M`` layers of ``N``
waypoints and ``G`` goals the transition costs are

* ``C_s`` (B, N): start to first layer,
* ``C_h`` (B, M-1, N, N): layer ``m`` to layer ``m+1``,
* ``C_l`` (B, N, G): last layer to goals,

and the values are ``V_s`` (B,), ``V_h`` (B, M, N) and ``V_g`` (B, G).
Collision costs are either 0 or ``inf``, so a start value is finite exactly
when the sampled graph contains a collision-free path.
"""

from __future__ import annotations

import heapq
import json
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config_space import World, batch_edge_cost, edge_cost, edge_length
from .graph import GoalSet, PlannerParams, sample_waypoints


class PlanningInputError(ValueError):
    """Start or goals are invalid (as opposed to the planner finding no path)."""


@dataclass
class CostMatrices:
    C_s: np.ndarray
    C_h: np.ndarray
    C_l: np.ndarray

    @property
    def B(self) -> int:
        return self.C_s.shape[0]

    @property
    def M(self) -> int:
        return self.C_h.shape[1] + 1

    @property
    def N(self) -> int:
        return self.C_s.shape[1]

    @property
    def num_goals(self) -> int:
        return self.C_l.shape[2]


@dataclass
class ValueMatrices:
    V_s: np.ndarray
    V_h: np.ndarray
    V_g: np.ndarray

    def copy(self) -> "ValueMatrices":
        return ValueMatrices(self.V_s.copy(), self.V_h.copy(), self.V_g.copy())


@dataclass
class PlanResult:
    """Traced paths of one batch.

    ``paths`` has shape (B, M+2, d): the start, one waypoint per layer and the
    chosen goal.  ``waypoint_index`` (B, M) records the layer-local index of
    every traced waypoint.  Spline plans additionally carry ``knots`` (M+2,)
    and ``spline_coeffs`` (B, M+1, 4, d) with rows ``a, b, c, d`` per edge.
    """

    paths: np.ndarray
    optimal_values: np.ndarray
    feasible: np.ndarray
    goal_index: np.ndarray
    waypoint_index: np.ndarray
    knots: Optional[np.ndarray] = None
    spline_coeffs: Optional[np.ndarray] = None
    plan_time: float = field(default=0.0, compare=False)

    @property
    def B(self) -> int:
        return self.paths.shape[0]

    def to_dict(self) -> dict:
        doc = {
            "paths": self.paths.tolist(),
            "values": [_encode_float(v) for v in self.optimal_values],
            "feasible": [bool(f) for f in self.feasible],
            "goal_index": [int(g) for g in self.goal_index],
            "waypoint_index": self.waypoint_index.tolist(),
        }
        if self.spline_coeffs is not None:
            knots = self.knots.tolist()
            doc["splines"] = [
                {
                    "knots": knots,
                    "edges": [
                        {"a": e[0].tolist(), "b": e[1].tolist(), "c": e[2].tolist(), "d": e[3].tolist()}
                        for e in coeffs
                    ],
                }
                for coeffs in self.spline_coeffs
            ]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "PlanResult":
        paths = np.asarray(doc["paths"], dtype=float)
        knots = coeffs = None
        if "splines" in doc:
            knots = np.asarray(doc["splines"][0]["knots"], dtype=float) if doc["splines"] else None
            coeffs = np.array(
                [[[e["a"], e["b"], e["c"], e["d"]] for e in s["edges"]] for s in doc["splines"]],
                dtype=float,
            )
        B = len(doc["values"])
        wi = doc.get("waypoint_index")
        return cls(
            paths=paths.reshape(B, -1, paths.shape[-1]) if paths.size else paths.reshape(0, 0, 0),
            optimal_values=np.array([_decode_float(v) for v in doc["values"]], dtype=float),
            feasible=np.asarray(doc["feasible"], dtype=bool),
            goal_index=np.asarray(doc["goal_index"], dtype=np.intp),
            waypoint_index=np.asarray(wi, dtype=np.intp) if wi is not None else np.zeros((B, 0), np.intp),
            knots=knots,
            spline_coeffs=coeffs,
        )

    @classmethod
    def from_json(cls, text: str) -> "PlanResult":
        return cls.from_dict(json.loads(text))


def _encode_float(v):
    v = float(v)
    if np.isposinf(v):
        return "inf"
    return v


def _decode_float(v) -> float:
    return float("inf") if v == "inf" else float(v)


def _check_shapes(q0: np.ndarray, Q: np.ndarray, goals: GoalSet):
    if Q.ndim != 4:
        raise ValueError("waypoint tensor must have shape (B, M, N, d)")
    d = Q.shape[-1]
    if q0.shape != (d,) or goals.dim != d:
        raise ValueError("start, waypoints and goals must share the configuration dimension")


def build_cost_matrices(world: World, q0, Q: np.ndarray, goals: GoalSet, H: int) -> CostMatrices:
    """Probe every graph edge and return the transition cost matrices."""
    q0 = np.asarray(q0, dtype=float)
    Q = np.asarray(Q, dtype=float)
    _check_shapes(q0, Q, goals)
    if Q.shape[-1] != world.dim:
        raise ValueError("waypoint dimension does not match the world")
    G = goals.values
    C_s = batch_edge_cost(world, q0[None, None, :], Q[:, 0], H)
    C_h = batch_edge_cost(world, Q[:, :-1, :, None, :], Q[:, 1:, None, :, :], H)
    C_l = batch_edge_cost(world, Q[:, -1, :, None, :], G[None, None, :, :], H)
    return CostMatrices(C_s, C_h, C_l)


def init_values(costs: CostMatrices, goals: GoalSet) -> ValueMatrices:
    B, M, N = costs.B, costs.M, costs.N
    return ValueMatrices(
        V_s=np.full(B, np.inf),
        V_h=np.full((B, M, N), np.inf),
        V_g=np.broadcast_to(goals.terminal_costs, (B, len(goals))).copy(),
    )


def bellman_sweep(costs: CostMatrices, values: ValueMatrices) -> ValueMatrices:
    """One synchronous Bellman backup over all layers (updates ``values`` in place).

    Every layer and the start are backed up from the previous iterate, so
    goal information travels one layer per sweep and ``M + 1`` sweeps reach
    the start.
    """
    V_h = values.V_h
    start = np.min(costs.C_s + V_h[:, 0], axis=-1)
    last = np.min(costs.C_l + values.V_g[:, None, :], axis=-1)
    if costs.M > 1:
        V_h[:, :-1] = np.min(costs.C_h + V_h[:, 1:, None, :], axis=-1)
    V_h[:, -1] = last
    values.V_s[:] = start
    return values


def value_iteration(costs: CostMatrices, goals: GoalSet, sweeps: Optional[int] = None) -> ValueMatrices:
    """Run ``M + 1`` Bellman sweeps; the result is the exact optimal value."""
    if costs.num_goals != len(goals):
        raise ValueError("cost matrices and goal set disagree on the number of goals")
    values = init_values(costs, goals)
    for _ in range(costs.M + 1 if sweeps is None else sweeps):
        bellman_sweep(costs, values)
    return values


def trace_indices(costs: CostMatrices, values: ValueMatrices) -> tuple[np.ndarray, np.ndarray]:
    """Greedy policy extraction. Ties resolve to the lowest index."""
    B, M = costs.B, costs.M
    rows = np.arange(B)
    idx = np.empty((B, M), dtype=np.intp)
    i = np.argmin(costs.C_s + values.V_h[:, 0], axis=-1)
    idx[:, 0] = i
    for m in range(1, M):
        i = np.argmin(costs.C_h[rows, m - 1, i] + values.V_h[:, m], axis=-1)
        idx[:, m] = i
    goal = np.argmin(costs.C_l[rows, i] + values.V_g, axis=-1)
    return idx, goal


def path_cost(costs: CostMatrices, values: ValueMatrices, idx: np.ndarray, goal: np.ndarray) -> np.ndarray:
    """Cost of the given index paths, summed back to front like the backups."""
    B, M = idx.shape
    rows = np.arange(B)
    total = costs.C_l[rows, idx[:, -1], goal] + values.V_g[rows, goal]
    for m in range(M - 2, -1, -1):
        total = costs.C_h[rows, m, idx[:, m], idx[:, m + 1]] + total
    return costs.C_s[rows, idx[:, 0]] + total


def trace_path(costs: CostMatrices, values: ValueMatrices, Q: np.ndarray, goals: GoalSet, q0=None) -> PlanResult:
    """Extract the optimal path of every batch entry.

    Infeasible entries still get a trace and are flagged ``feasible=False``.
    ``q0`` defaults to the origin when only indices are of interest.
    """
    Q = np.asarray(Q, dtype=float)
    idx, goal = trace_indices(costs, values)
    B, M = idx.shape
    d = Q.shape[-1]
    q0 = np.zeros(d) if q0 is None else np.asarray(q0, dtype=float)

    traced = path_cost(costs, values, idx, goal)
    finite = np.isfinite(values.V_s)
    if not np.array_equal(traced[finite], values.V_s[finite]) or np.any(np.isfinite(traced[~finite])):
        raise AssertionError("traced path cost disagrees with the optimal start value")

    rows = np.arange(B)
    paths = np.empty((B, M + 2, d))
    paths[:, 0] = q0
    paths[:, 1:-1] = Q[rows[:, None], np.arange(M)[None, :], idx]
    paths[:, -1] = goals.values[goal]
    return PlanResult(
        paths=paths,
        optimal_values=values.V_s.copy(),
        feasible=is_feasible(values.V_s),
        goal_index=goal,
        waypoint_index=idx,
    )


def is_feasible(V_s):
    """A start value is feasible exactly when it is finite."""
    out = np.asarray(V_s) < np.inf
    return bool(out) if out.ndim == 0 else out


def check_endpoints(world: World, q0: np.ndarray, goals: GoalSet) -> None:
    if q0.shape != (world.dim,) or goals.dim != world.dim:
        raise PlanningInputError(f"start and goals must have dimension {world.dim}")
    if world.in_collision(q0):
        raise PlanningInputError("start configuration is in collision")
    if np.all(world.in_collision(goals.values)):
        raise PlanningInputError("every goal configuration is in collision")


def plan(world: World, q0, goals: GoalSet, params: PlannerParams) -> PlanResult:
    """Sample a batch of graphs, probe all edges, run value iteration and trace."""
    q0 = np.asarray(q0, dtype=float)
    check_endpoints(world, q0, goals)
    t0 = time.perf_counter()
    Q = sample_waypoints(params, world.limits)
    costs = build_cost_matrices(world, q0, Q, goals, params.H)
    values = value_iteration(costs, goals)
    result = trace_path(costs, values, Q, goals, q0)
    result.plan_time = time.perf_counter() - t0
    return result


def dijkstra_oracle(costs: CostMatrices, goals: GoalSet) -> list[tuple[float, list[int]]]:
    """Exact shortest paths on the explicitly enumerated graph.

    Runs Dijkstra from a virtual sink behind the goals over reversed edges, so
    path costs accumulate in the same order as the value backups.  Among
    equal-cost successors the lowest layer-local index wins.  Returns, per
    batch entry, the optimal cost and the layer-local node indices
    ``[i_1, ..., i_M, goal]``.
    """
    B, M, N, G = costs.B, costs.M, costs.N, costs.num_goals
    out = []
    for b in range(B):
        # node ids: 0 = start, 1 + m*N + i = waypoint (m, i), 1 + M*N + g = goal, last = sink
        n_nodes = 2 + M * N + G
        sink = n_nodes - 1
        preds = [[] for _ in range(n_nodes)]  # preds[v] = [(u, w, local index of v)]

        def wp(m, i):
            return 1 + m * N + i

        for i in range(N):
            preds[wp(0, i)].append((0, costs.C_s[b, i], i))
        for m in range(M - 1):
            for i in range(N):
                for j in range(N):
                    preds[wp(m + 1, j)].append((wp(m, i), costs.C_h[b, m, i, j], j))
        for i in range(N):
            for g in range(G):
                preds[1 + M * N + g].append((wp(M - 1, i), costs.C_l[b, i, g], g))
        for g in range(G):
            preds[sink].append((1 + M * N + g, float(goals.terminal_costs[g]), 0))

        dist = [np.inf] * n_nodes
        succ = [0] * n_nodes
        dist[sink] = 0.0
        heap = [(0.0, sink)]
        while heap:
            dv, v = heapq.heappop(heap)
            if dv > dist[v]:
                continue
            for u, w, local in preds[v]:
                cand = w + dv
                if not np.isfinite(cand):
                    continue
                if cand < dist[u]:
                    dist[u] = cand
                    succ[u] = local
                    heapq.heappush(heap, (cand, u))
                elif cand == dist[u] and local < succ[u]:
                    succ[u] = local

        seq = []
        node = 0
        for m in range(M):
            i = succ[node]
            seq.append(i)
            node = wp(m, i)
        seq.append(succ[node])
        out.append((float(dist[0]), seq))
    return out


def reprobe_paths(world: World, paths: np.ndarray, H: int) -> np.ndarray:
    """Independently re-check every straight segment of every path at
    ``H`` probes; returns a per-path boolean "collision free" mask."""
    paths = np.asarray(paths, dtype=float)
    cost = batch_edge_cost(world, paths[:, :-1], paths[:, 1:], H)
    return np.all(np.isfinite(cost), axis=-1)


def straight_path_length(paths: np.ndarray) -> np.ndarray:
    paths = np.asarray(paths, dtype=float)
    return np.sum(edge_length(paths[:, :-1], paths[:, 1:]), axis=-1)


__all__ = [
    "CostMatrices",
    "ValueMatrices",
    "PlanResult",
    "PlanningInputError",
    "build_cost_matrices",
    "bellman_sweep",
    "value_iteration",
    "trace_path",
    "trace_indices",
    "is_feasible",
    "plan",
    "dijkstra_oracle",
    "reprobe_paths",
    "edge_cost",
]
