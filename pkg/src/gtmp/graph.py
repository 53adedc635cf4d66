"""Random multipartite graph discretization.

The graph has a start node, ``M`` layers of ``N`` waypoints each and a goal
partition.  Edges connect the start to every first-layer waypoint, every
waypoint of layer ``m`` to every waypoint of layer ``m+1`` and every last-layer
waypoint to every goal.  The graph is never built explicitly: it is fully
described by the waypoint tensor ``Q`` of shape ``(B, M, N, d)`` and the goal
array.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config_space import ConfigLimits

# Signature of a per-layer proposal: (generator, layer index, N, limits) -> (N, d)
LayerSampler = Callable[[np.random.Generator, int, int, ConfigLimits], np.ndarray]


@dataclass(frozen=True)
class PlannerParams:
    """Discretization and batching parameters.

    ``offset`` is the global index of the first batch entry.  Batch entry ``b``
    of a plan always draws from the random stream ``(seed, offset + b)``, so a
    single-entry plan with ``offset=b`` reproduces entry ``b`` of a larger batch.
    """

    M: int
    N: int
    H: int = 10
    B: int = 1
    seed: int = 0
    offset: int = 0

    def __post_init__(self):
        for name in ("M", "N", "B"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")
        if int(self.H) < 2:
            raise ValueError("H must be at least 2")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.offset < 0:
            raise ValueError("offset must be non-negative")


@dataclass(frozen=True)
class GoalSet:
    values: np.ndarray
    terminal_costs: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValueError("a goal set needs at least one goal")
        if self.terminal_costs is None:
            costs = np.zeros(values.shape[0])
        else:
            costs = np.asarray(self.terminal_costs, dtype=float).reshape(-1)
        if costs.shape != (values.shape[0],) or np.any(costs < 0):
            raise ValueError("terminal costs must be one non-negative value per goal")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "terminal_costs", costs)

    def __len__(self):
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def batch_generator(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one batch entry, keyed by (seed, index)."""
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_layer(rng: np.random.Generator, layer: int, N: int, limits: ConfigLimits) -> np.ndarray:
    return limits.lower + (limits.upper - limits.lower) * rng.random((N, limits.dim))


def sample_waypoints(params: PlannerParams, limits: ConfigLimits, sampler: LayerSampler = uniform_layer) -> np.ndarray:
    """Draw the ``(B, M, N, d)`` waypoint tensor.

    Each batch entry uses its own Philox stream and consumes it layer by layer,
    so the result does not depend on the order batch entries are generated in.
    ``sampler`` is the per-layer proposal; only the uniform proposal over the
    limits box is provided.
    """
    Q = np.empty((params.B, params.M, params.N, limits.dim))
    for b in range(params.B):
        rng = batch_generator(params.seed, params.offset + b)
        for m in range(params.M):
            Q[b, m] = sampler(rng, m, params.N, limits)
    return Q


def graph_edge_count(M: int, N: int, num_goals: int) -> int:
    if min(M, N, num_goals) < 1:
        raise ValueError("M, N and num_goals must be positive")
    return N + (M - 1) * N * N + N * num_goals
