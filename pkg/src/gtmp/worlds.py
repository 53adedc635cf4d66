"""Synthetic occupancy maps used by the demos, benchmarks and tests."""

from __future__ import annotations

import numpy as np

from .config_space import OccupancyGrid, World


def _carve(cells: np.ndarray, res: float, x0, x1, y0, y1, value=False):
    c0, c1 = int(round(x0 / res)), int(round(x1 / res))
    r0, r1 = int(round(y0 / res)), int(round(y1 / res))
    cells[r0:r1, c0:c1] = value


def u_corridor(resolution: float = 0.1):
    """U-shaped corridor in a 10 x 10 map.

    Up the left leg, across the top, down the right leg.  Start and goal sit
    deep in the two legs, so every collision-free polyline needs at least
    three segments (two layers).

    Returns ``(world, start, goal)``.
    """
    cells = np.ones((int(round(10 / resolution)),) * 2, dtype=bool)
    _carve(cells, resolution, 0.5, 2.0, 0.5, 9.5)
    _carve(cells, resolution, 0.5, 5.5, 8.0, 9.5)
    _carve(cells, resolution, 4.0, 5.5, 0.5, 9.5)
    world = World.from_grid(OccupancyGrid(cells, (0.0, 0.0), resolution))
    return world, np.array([1.25, 1.25]), np.array([4.75, 1.25])


def hook_corridor(resolution: float = 0.1):
    """The U corridor extended by a fourth leg running right along the bottom.

    The goal sits at the far end of that leg, so collision-free polylines need
    at least four segments: three layers is the smallest graph that can
    contain a solution.

    Returns ``(world, start, goal)``.
    """
    cells = np.ones((int(round(10 / resolution)),) * 2, dtype=bool)
    _carve(cells, resolution, 0.5, 2.0, 0.5, 9.5)
    _carve(cells, resolution, 0.5, 5.5, 8.0, 9.5)
    _carve(cells, resolution, 4.0, 5.5, 0.5, 9.5)
    _carve(cells, resolution, 4.0, 9.5, 0.5, 2.0)
    world = World.from_grid(OccupancyGrid(cells, (0.0, 0.0), resolution))
    return world, np.array([1.25, 1.25]), np.array([9.0, 1.25])


def office_map(size: int = 256, resolution: float = 0.05, margin_delta: float = 0.0) -> World:
    """Lab-floor style map: outer walls, a corridor, rooms with doors and pillars.

    Walls are ``size // 32`` cells thick (at least 5) and doors a few wall
    thicknesses wide, so every obstacle and opening spans at least 5 cells.
    """
    cells = np.zeros((size, size), dtype=bool)
    wall = max(5, size // 32)
    door = 4 * wall
    cells[:wall, :] = cells[-wall:, :] = True
    cells[:, :wall] = cells[:, -wall:] = True

    # horizontal corridor walls at 40% and 60% height, with doors into rooms
    for frac, door_at in ((0.4, (0.15, 0.55, 0.8)), (0.6, (0.3, 0.7))):
        r = int(frac * size)
        cells[r : r + wall, :] = True
        for d in door_at:
            c = int(d * size)
            cells[r : r + wall, c : c + door] = False

    # room dividers below and above the corridor
    for c_frac in (0.33, 0.66):
        c = int(c_frac * size)
        cells[: int(0.4 * size), c : c + wall] = True
        cells[int(0.6 * size) :, c : c + wall] = True
        mid = int(0.2 * size)
        cells[mid : mid + door, c : c + wall] = False
        mid = int(0.8 * size)
        cells[mid : mid + door, c : c + wall] = False

    # pillars in the rooms
    p = 2 * wall
    for rf, cf in ((0.15, 0.15), (0.25, 0.5), (0.75, 0.2), (0.8, 0.5), (0.7, 0.85), (0.2, 0.85)):
        r, c = int(rf * size), int(cf * size)
        cells[r : r + p, c : c + p] = True

    grid = OccupancyGrid(cells, (0.0, 0.0), resolution)
    return World.from_grid(grid, margin_delta)


def sample_free(world: World, rng: np.random.Generator, count: int = 1) -> np.ndarray:
    lim = world.limits
    out = []
    while len(out) < count:
        q = lim.lower + (lim.upper - lim.lower) * rng.random((max(count, 16), lim.dim))
        out.extend(q[~world.in_collision(q)])
    return np.asarray(out[:count])
