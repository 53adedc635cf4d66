"""Independent reference implementations used as test oracles.

Everything here is written with plain loops or a different algorithm than the
library so that agreement is evidence of correctness rather than of shared
code paths.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from gtmp.config_space import Box, ConfigLimits, OccupancyGrid, PrimitiveSet, Sphere, World


def point_in_collision(world: World, q) -> bool:
    """Scalar collision test straight from the definitions."""
    q = [float(v) for v in q]
    lo, hi = world.limits.lower, world.limits.upper
    if any(v < l or v > h for v, l, h in zip(q, lo, hi)):
        return True
    geo = world.geometry
    if isinstance(geo, OccupancyGrid):
        col = math.floor((q[0] - geo.origin[0]) / geo.resolution)
        row = math.floor((q[1] - geo.origin[1]) / geo.resolution)
        rows, cols = geo.shape
        if not (0 <= row < rows and 0 <= col < cols):
            return True
        if world.margin_delta == 0:
            return bool(geo.cells[row, col])
        return brute_distance_field(geo.cells, geo.resolution)[row, col] <= world.margin_delta
    best = math.inf
    for s in geo.spheres:
        best = min(best, math.dist(q, s.center) - s.radius)
    for b in geo.boxes:
        outside = 0.0
        inside = -math.inf
        for v, c, h in zip(q, b.center, b.half_extents):
            d = abs(v - c) - h
            outside += max(d, 0.0) ** 2
            inside = max(inside, d)
        best = min(best, math.sqrt(outside) + min(inside, 0.0))
    return best <= world.margin_delta


def scalar_edge_cost(world: World, q, q2, H: int) -> float:
    """Mean of H probe costs plus length, one probe at a time."""
    total = 0.0
    for k in range(H):
        u, w = (H - 1 - k) / (H - 1), k / (H - 1)
        p = [u * a + w * b for a, b in zip(q, q2)]
        total += math.inf if point_in_collision(world, p) else 0.0
    return total / H + math.sqrt(sum((a - b) ** 2 for a, b in zip(q, q2)))


def brute_distance_field(cells: np.ndarray, resolution: float) -> np.ndarray:
    """Distance from each cell centre to the nearest occupied cell centre,
    the one-cell ring around the grid counting as occupied."""
    rows, cols = cells.shape
    occ = [(r, c) for r in range(-1, rows + 1) for c in range(-1, cols + 1)
           if r < 0 or c < 0 or r >= rows or c >= cols or cells[r, c]]
    occ = np.array(occ, dtype=float)
    out = np.empty(cells.shape)
    for r in range(rows):
        for c in range(cols):
            out[r, c] = np.sqrt(np.min((occ[:, 0] - r) ** 2 + (occ[:, 1] - c) ** 2))
    return out * resolution


def enumerate_paths(costs, goals, b: int):
    """Every start-to-goal index path of batch entry ``b`` with its cost,
    accumulated back to front.  Returns (costs array, list of index tuples)."""
    M, N, G = costs.M, costs.N, costs.num_goals
    seqs, vals = [], []
    for layers in itertools.product(range(N), repeat=M):
        for g in range(G):
            total = costs.C_l[b, layers[-1], g] + goals.terminal_costs[g]
            for m in range(M - 2, -1, -1):
                total = costs.C_h[b, m, layers[m], layers[m + 1]] + total
            total = costs.C_s[b, layers[0]] + total
            seqs.append(tuple(layers) + (g,))
            vals.append(total)
    return np.array(vals), seqs


def exact_ot_uniform(X: np.ndarray, Y: np.ndarray) -> float:
    """Exact OT cost between equal-size uniform point sets.

    For uniform weights the vertices of the coupling polytope are the
    permutation matrices scaled by 1/n, so enumerating permutations solves
    the LP exactly.
    """
    n = X.shape[0]
    assert Y.shape[0] == n
    C = ((X[:, None, :] - Y[None, :, :]) ** 2).sum(-1)
    return min(sum(C[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n))) / n


def makima_slopes_1d(x, y):
    """Textbook modified-Akima slopes of a scalar sequence (interior knots)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    m = np.diff(y) / np.diff(x)
    n = len(x)
    s = np.full(n, np.nan)
    for i in range(2, n - 2):
        m0, m1, m2, m3 = m[i - 2], m[i - 1], m[i], m[i + 1]
        w1 = abs(m3 - m2) + 0.5 * abs(m3 + m2)
        w2 = abs(m1 - m0) + 0.5 * abs(m1 + m0)
        s[i] = 0.5 * (m1 + m2) if w1 + w2 < 1e-12 else (w1 * m1 + w2 * m2) / (w1 + w2)
    return s


def random_primitive_world(rng: np.random.Generator, dim: int = 2, size: float = 10.0, max_obstacles: int = 6) -> World:
    spheres, boxes = [], []
    for _ in range(rng.integers(0, max_obstacles + 1)):
        c = rng.uniform(0, size, dim)
        if rng.random() < 0.5:
            spheres.append(Sphere(c, rng.uniform(0.3, 2.0)))
        else:
            boxes.append(Box(c, rng.uniform(0.2, 1.5, dim)))
    return World(ConfigLimits(np.zeros(dim), np.full(dim, size)), PrimitiveSet(spheres, boxes))
