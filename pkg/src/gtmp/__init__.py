"""Batched global motion planning on random multipartite graphs.

Waypoints are sampled layer by layer, every edge is probed for collisions in
one batched pass, and finite value iteration followed by a greedy trace yields
one optimal path per graph in the batch.  The spline variant replaces the
straight edges by Akima cubics so traced paths are C1.
"""

from .akima import (
    akima_edge_cost,
    build_akima_cost_matrices,
    evaluate_spline,
    layer_slopes,
    plan_akima,
    sample_spline,
    uniform_knots,
)
from .config_space import (
    Box,
    ConfigLimits,
    OccupancyGrid,
    PrimitiveSet,
    Sphere,
    World,
    batch_edge_cost,
    collision_cost,
    edge_cost,
    empty_world,
    load_world,
)
from .graph import GoalSet, PlannerParams, graph_edge_count, sample_waypoints
from .metrics import (
    SinkhornNotConverged,
    batch_min_cosim,
    min_cosine_similarity,
    path_diversity,
    sinkhorn_distance,
    total_variation,
)
from .planner import (
    CostMatrices,
    PlanningInputError,
    PlanResult,
    ValueMatrices,
    bellman_sweep,
    build_cost_matrices,
    dijkstra_oracle,
    plan,
    trace_path,
    value_iteration,
)
from .render import render_svg

__version__ = "0.1.0"
