"""SVG overlays of planar worlds and planned batches."""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

from .akima import sample_spline
from .config_space import OccupancyGrid, World
from .planner import PlanResult

# Samples per spline edge; dense enough that the drawn curve stays well under
# a pixel from the true cubic at the default canvas size.
SPLINE_SAMPLES = 40


class _Canvas:
    """Maps world coordinates to pixels, y pointing down."""

    def __init__(self, world: World, width: int):
        lim = world.limits
        self.lower = lim.lower
        span = lim.upper - lim.lower
        self.scale = width / span[0]
        self.width = width
        self.height = int(round(span[1] * self.scale))
        self.top = lim.upper[1]

    def px(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        x = (points[..., 0] - self.lower[0]) * self.scale
        y = (self.top - points[..., 1]) * self.scale
        return np.stack([x, y], axis=-1)


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _points_attr(pts: np.ndarray) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)


def _grid_rects(canvas: _Canvas, grid: OccupancyGrid) -> list[str]:
    """One rectangle per horizontal run of occupied cells."""
    out = []
    res = grid.resolution
    for r in range(grid.shape[0]):
        row = grid.cells[r].astype(np.int8)
        edges = np.flatnonzero(np.diff(np.concatenate([[0], row, [0]])))
        for c0, c1 in zip(edges[::2], edges[1::2]):
            lo = grid.origin + np.array([c0 * res, r * res])
            hi = grid.origin + np.array([c1 * res, (r + 1) * res])
            (x0, y1), (x1, y0) = canvas.px(np.array([lo, hi]))
            out.append(
                f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" height="{_fmt(y1 - y0)}" fill="#404040"/>'
            )
    return out


def _primitive_shapes(canvas: _Canvas, world: World) -> list[str]:
    out = []
    for s in world.geometry.spheres:
        cx, cy = canvas.px(s.center)
        out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(s.radius * canvas.scale)}" fill="#404040"/>')
    for b in world.geometry.boxes:
        (x0, y1), (x1, y0) = canvas.px(np.array([b.center - b.half_extents, b.center + b.half_extents]))
        out.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" height="{_fmt(y1 - y0)}" fill="#404040"/>'
        )
    return out


def path_polylines(result: PlanResult) -> list[np.ndarray]:
    """World-space vertex lists to draw: traced polylines, or densely sampled
    cubics when the result carries spline coefficients."""
    if result.B == 0:
        return []
    if result.spline_coeffs is not None:
        return [sample_spline(result.knots, c, SPLINE_SAMPLES) for c in result.spline_coeffs]
    return [p for p in result.paths]


def render_svg(world: World, result: PlanResult | None, start=None, goals=None, width: int = 800) -> str:
    """SVG document with the world, the batch paths, start (red) and goals (green)."""
    if world.dim != 2:
        raise ValueError("only 2-D worlds can be rendered")
    canvas = _Canvas(world, width)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas.width}" height="{canvas.height}" '
        f'viewBox="0 0 {canvas.width} {canvas.height}">',
        f'<rect x="0" y="0" width="{canvas.width}" height="{canvas.height}" fill="white"/>',
        '<g id="obstacles">',
    ]
    if isinstance(world.geometry, OccupancyGrid):
        parts += _grid_rects(canvas, world.geometry)
    else:
        parts += _primitive_shapes(canvas, world)
    parts.append("</g>")

    parts.append('<g id="paths" fill="none" stroke-width="1.5">')
    if result is not None:
        for b, pts in enumerate(path_polylines(result)):
            colour = "#1f77b4" if result.feasible[b] else "#bbbbbb"
            parts.append(f"<polyline points={quoteattr(_points_attr(canvas.px(pts)))} stroke=\"{colour}\"/>")
    parts.append("</g>")

    if start is None and result is not None and result.B > 0:
        start = result.paths[0, 0]
    if start is not None:
        cx, cy = canvas.px(start)
        parts.append(f'<circle class="start" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="5" fill="red"/>')
    if goals is not None:
        for g in np.atleast_2d(goals):
            cx, cy = canvas.px(g)
            parts.append(f'<circle class="goal" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="5" fill="green"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


__all__ = ["render_svg", "path_polylines", "SPLINE_SAMPLES"]
