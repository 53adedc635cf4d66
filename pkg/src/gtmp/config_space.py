"""Configuration spaces, collision worlds and probed edge costs.

A :class:`World` couples box-shaped configuration limits with a collision
geometry (an occupancy grid or a set of spheres and boxes).  Collision cost is
unbounded: a configuration costs 0 when it lies strictly inside free space by
more than ``margin_delta`` and ``inf`` otherwise.  Edge costs probe ``H``
equidistant points on the straight segment and add the Euclidean length.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

# Probe batches are split so that no temporary exceeds roughly this many points.
PROBE_CHUNK = 1 << 21


@dataclass(frozen=True)
class ConfigLimits:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.ndim != 1 or lower.shape != upper.shape or lower.size < 1:
            raise ValueError("limits must be two 1-D vectors of equal length")
        if not np.all(lower < upper):
            raise ValueError("every lower limit must be strictly below the upper limit")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.all((points >= self.lower) & (points <= self.upper), axis=-1)


@dataclass(frozen=True)
class OccupancyGrid:
    """Planar occupancy grid.

    ``cells[row, col]`` covers ``x in [ox + col*res, ox + (col+1)*res)`` and
    ``y in [oy + row*res, oy + (row+1)*res)``, i.e. row 0 is the bottom row.
    Queries outside the grid are treated as occupied.
    """

    cells: np.ndarray
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))
    resolution: float = 1.0

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=bool)
        if cells.ndim != 2 or cells.size == 0:
            raise ValueError("occupancy cells must be a non-empty 2-D array")
        if not self.resolution > 0:
            raise ValueError("grid resolution must be positive")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(2))
        object.__setattr__(self, "resolution", float(self.resolution))

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def extent(self) -> ConfigLimits:
        rows, cols = self.cells.shape
        size = np.array([cols, rows], dtype=float) * self.resolution
        return ConfigLimits(self.origin.copy(), self.origin + size)

    def cell_index(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Row and column index of each point (may fall outside the grid)."""
        points = np.asarray(points, dtype=float)
        inv = 1.0 / self.resolution
        col = np.floor((points[..., 0] - self.origin[0]) * inv)
        row = np.floor((points[..., 1] - self.origin[1]) * inv)
        return row, col

    def distance_field(self) -> np.ndarray:
        """Euclidean distance (world units) from each cell centre to the
        nearest occupied cell centre, with everything outside the grid
        counted as occupied."""
        padded = np.pad(self.cells, 1, constant_values=True)
        dist = ndimage.distance_transform_edt(~padded)
        return dist[1:-1, 1:-1] * self.resolution


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(-1))
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")


@dataclass(frozen=True)
class Box:
    center: np.ndarray
    half_extents: np.ndarray

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(-1)
        half = np.asarray(self.half_extents, dtype=float).reshape(-1)
        if center.shape != half.shape:
            raise ValueError("box center and half extents differ in dimension")
        if not np.all(half > 0):
            raise ValueError("box half extents must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "half_extents", half)


@dataclass(frozen=True)
class PrimitiveSet:
    spheres: tuple = ()
    boxes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "spheres", tuple(self.spheres))
        object.__setattr__(self, "boxes", tuple(self.boxes))

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """Distance to the closest primitive (negative inside)."""
        points = np.asarray(points, dtype=float)
        dist = np.full(points.shape[:-1], np.inf)
        for s in self.spheres:
            d = np.sqrt(np.sum((points - s.center) ** 2, axis=-1)) - s.radius
            np.minimum(dist, d, out=dist)
        for b in self.boxes:
            q = np.abs(points - b.center) - b.half_extents
            outside = np.sqrt(np.sum(np.maximum(q, 0.0) ** 2, axis=-1))
            inside = np.minimum(np.max(q, axis=-1), 0.0)
            np.minimum(dist, outside + inside, out=dist)
        return dist


class World:
    """Immutable collision world.

    Parameters
    ----------
    limits : ConfigLimits
        Box bounding the configuration space. Queries outside are in collision.
    geometry : OccupancyGrid or PrimitiveSet
    margin_delta : float, optional
        Clearance required from obstacles. ``0`` means strict free space.
    """

    def __init__(self, limits: ConfigLimits, geometry, margin_delta: float = 0.0):
        if margin_delta < 0:
            raise ValueError("margin_delta must be non-negative")
        if isinstance(geometry, OccupancyGrid) and limits.dim != 2:
            raise ValueError("occupancy grids require a 2-D configuration space")
        if isinstance(geometry, PrimitiveSet):
            for prim in geometry.spheres + geometry.boxes:
                if prim.center.size != limits.dim:
                    raise ValueError("primitive dimension does not match the limits")
        self.limits = limits
        self.geometry = geometry
        self.margin_delta = float(margin_delta)
        self._blocked = None
        if isinstance(geometry, OccupancyGrid):
            if self.margin_delta > 0:
                blocked = geometry.distance_field() <= self.margin_delta
            else:
                blocked = geometry.cells.copy()
            # One occupied border cell absorbs every out-of-grid index after clipping.
            self._blocked = np.pad(blocked, 1, constant_values=True)
            self._blocked.setflags(write=False)
            # With limits equal to the grid extent, leaving the limits always
            # lands in the border, so the explicit limits test can be skipped.
            ext = geometry.extent()
            self._grid_is_limits = bool(np.array_equal(ext.lower, limits.lower) and np.array_equal(ext.upper, limits.upper))

    @classmethod
    def from_grid(cls, grid: OccupancyGrid, margin_delta: float = 0.0) -> "World":
        return cls(grid.extent(), grid, margin_delta)

    @property
    def dim(self) -> int:
        return self.limits.dim

    def in_collision(self, points: np.ndarray) -> np.ndarray:
        """Boolean collision mask over the trailing axis of ``points``."""
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dim:
            raise ValueError(f"expected configurations of dimension {self.dim}, got {points.shape[-1]}")
        if isinstance(self.geometry, OccupancyGrid):
            return self.grid_hit(points[..., 0], points[..., 1])
        lim = self.limits
        hit = np.any((points < lim.lower) | (points > lim.upper), axis=-1)
        hit |= self.geometry.signed_distance(points) <= self.margin_delta
        return hit

    def grid_hit(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Collision mask for planar points given as separate coordinate arrays."""
        grid = self.geometry
        rows, cols = grid.shape
        inv = 1.0 / grid.resolution
        col = np.floor((x - grid.origin[0]) * inv)
        row = np.floor((y - grid.origin[1]) * inv)
        col = np.clip(col, -1, cols).astype(np.intp) + 1
        row = np.clip(row, -1, rows).astype(np.intp) + 1
        flat = row * (cols + 2) + col
        hit = self._blocked.ravel().take(flat)
        if not self._grid_is_limits:
            lim = self.limits
            hit |= (x < lim.lower[0]) | (x > lim.upper[0]) | (y < lim.lower[1]) | (y > lim.upper[1])
        return hit

    def __repr__(self):
        kind = type(self.geometry).__name__
        return f"World({kind}, dim={self.dim}, margin_delta={self.margin_delta})"


def collision_cost(world: World, q) -> float:
    """0 if ``q`` is in the margin-interior of free space, else ``inf``."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size != world.dim:
        raise ValueError(f"expected a configuration of dimension {world.dim}")
    return np.inf if world.in_collision(q) else 0.0


def probe_weights(H: int) -> tuple[np.ndarray, np.ndarray]:
    """Source and target weights of ``H`` probes, endpoints included.

    Both weights are integer ratios so the probes of a reversed edge are the
    same floating-point points in reverse order.
    """
    if H < 2:
        raise ValueError("at least two probes per edge are required")
    k = np.arange(H)
    return (H - 1 - k) / (H - 1), k / (H - 1)


def edge_probe_points(q, q2, H: int) -> np.ndarray:
    """``H`` equidistant points from ``q`` to ``q2`` inclusive, shape (H, d)."""
    u, w = probe_weights(H)
    q = np.asarray(q, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    return u[:, None] * q + w[:, None] * q2


def edge_length(q, q2) -> np.ndarray:
    diff = np.asarray(q, dtype=float) - np.asarray(q2, dtype=float)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def edge_cost(world: World, q, q2, H: int) -> float:
    """Probed collision cost plus straight-line length of one edge."""
    q = np.asarray(q, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q.shape != (world.dim,) or q2.shape != (world.dim,):
        raise ValueError(f"expected configurations of dimension {world.dim}")
    probes = edge_probe_points(q, q2, H)
    coll = np.where(world.in_collision(probes), np.inf, 0.0)
    return float(np.mean(coll) + edge_length(q, q2))


def batch_edge_cost(world: World, sources: np.ndarray, targets: np.ndarray, H: int) -> np.ndarray:
    """Edge cost for broadcastable arrays of sources and targets.

    ``sources`` and ``targets`` broadcast to ``(..., d)``; the result has the
    broadcast leading shape. Probing is evaluated in chunks along the leading
    axis to bound memory.
    """
    sources = np.asarray(sources, dtype=float)
    targets = np.asarray(targets, dtype=float)
    shape = np.broadcast_shapes(sources.shape, targets.shape)
    if shape[-1] != world.dim:
        raise ValueError(f"expected configurations of dimension {world.dim}")
    sources = np.broadcast_to(sources, shape)
    targets = np.broadcast_to(targets, shape)
    u, w = probe_weights(H)
    lead = shape[:-1]
    out = edge_length(sources, targets)
    if len(lead) == 0:
        return edge_cost(world, sources, targets, H)

    per_row = int(np.prod(lead[1:], dtype=np.int64)) * H
    step = max(1, PROBE_CHUNK // max(per_row, 1))
    for start in range(0, lead[0], step):
        sl = slice(start, start + step)
        src = sources[sl][..., None, :]
        dst = targets[sl][..., None, :]
        if isinstance(world.geometry, OccupancyGrid):
            x = u * src[..., 0] + w * dst[..., 0]
            y = u * src[..., 1] + w * dst[..., 1]
            hit = world.grid_hit(x, y).any(axis=-1)
        else:
            probes = u[:, None] * src + w[:, None] * dst
            hit = world.in_collision(probes).any(axis=-1)
        out[sl] = np.where(hit, np.inf, out[sl])
    return out


# ---------------------------------------------------------------------------
# file formats


def read_pgm(path) -> np.ndarray:
    """Read a P2 (ASCII) or P5 (binary) PGM image as a 2-D integer array
    scaled to 0..255, top row first."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    # header: magic, width, height, maxval, with '#' comments allowed
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    magic = tokens[0]
    width, height, maxval = (int(t) for t in tokens[1:])
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise ValueError(f"{path}: invalid PGM dimensions")
    if magic == b"P5":
        pos += 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        count = width * height
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
        img = raw.astype(np.int64)
    elif magic == b"P2":
        values = data[pos:].split()
        if len(values) < width * height:
            raise ValueError(f"{path}: not enough pixel values")
        img = np.array([int(v) for v in values[: width * height]], dtype=np.int64)
    else:
        raise ValueError(f"{path}: unsupported PGM magic {magic!r}")
    img = img.reshape(height, width)
    if maxval != 255:
        img = img * 255 // maxval
    return img


def write_pgm(path, image: np.ndarray, binary: bool = True) -> None:
    image = np.asarray(image, dtype=np.uint8)
    h, w = image.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(image.tobytes())
        else:
            fh.write(f"P2\n{w} {h}\n255\n".encode())
            for row in image:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())


def grid_from_image(image: np.ndarray, resolution: float, origin=(0.0, 0.0)) -> OccupancyGrid:
    """Dark pixels (< 128) are occupied. Image row 0 is the top of the map."""
    cells = np.asarray(image)[::-1] < 128
    return OccupancyGrid(cells, np.asarray(origin, dtype=float), resolution)


def grid_to_image(grid: OccupancyGrid) -> np.ndarray:
    return np.where(grid.cells[::-1], 0, 255).astype(np.uint8)


def load_world(path) -> World:
    """Load a world from its JSON description.

    Grid worlds name a PGM file (relative to the JSON file) with resolution
    and origin; primitive worlds list limits, spheres and boxes.
    """
    with open(path) as fh:
        doc = json.load(fh)
    return world_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def world_from_dict(doc: dict, base_dir: str = ".") -> World:
    margin = float(doc.get("margin_delta", 0.0))
    if "image" in doc:
        image_path = doc["image"]
        if not os.path.isabs(image_path):
            image_path = os.path.join(base_dir, image_path)
        grid = grid_from_image(read_pgm(image_path), doc["resolution"], doc.get("origin", (0.0, 0.0)))
        return World.from_grid(grid, margin)
    limits = ConfigLimits(doc["limits"]["lower"], doc["limits"]["upper"])
    spheres = [Sphere(s["center"], s["radius"]) for s in doc.get("spheres", [])]
    boxes = [Box(b["center"], b["half_extents"]) for b in doc.get("boxes", [])]
    return World(limits, PrimitiveSet(spheres, boxes), margin)


def save_grid_world(json_path, grid: OccupancyGrid, margin_delta: float = 0.0, binary: bool = True) -> None:
    """Write ``<name>.pgm`` next to ``json_path`` plus the sidecar JSON."""
    stem = os.path.splitext(os.path.basename(json_path))[0]
    pgm_name = stem + ".pgm"
    write_pgm(os.path.join(os.path.dirname(os.path.abspath(json_path)), pgm_name), grid_to_image(grid), binary)
    doc = {
        "image": pgm_name,
        "resolution": grid.resolution,
        "origin": grid.origin.tolist(),
        "margin_delta": margin_delta,
    }
    with open(json_path, "w") as fh:
        json.dump(doc, fh, indent=2)


def save_primitive_world(json_path, world: World) -> None:
    geo = world.geometry
    doc = {
        "limits": {"lower": world.limits.lower.tolist(), "upper": world.limits.upper.tolist()},
        "spheres": [{"center": s.center.tolist(), "radius": s.radius} for s in geo.spheres],
        "boxes": [{"center": b.center.tolist(), "half_extents": b.half_extents.tolist()} for b in geo.boxes],
        "margin_delta": world.margin_delta,
    }
    with open(json_path, "w") as fh:
        json.dump(doc, fh, indent=2)


def empty_world(lower: Sequence[float], upper: Sequence[float], margin_delta: float = 0.0) -> World:
    return World(ConfigLimits(lower, upper), PrimitiveSet(), margin_delta)
