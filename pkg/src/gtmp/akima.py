"""Spline discretization structure: Akima cubics on every graph edge.

Knots sit at ``t_m = m / (M + 1)`` for the start (``m = 0``), the ``M``
layers and the goals (``m = M + 1``).  Every edge between consecutive
partitions gets a chord slope; slopes are averaged per edge layer and blended
with the modified-Akima weights into one spline slope per knot.  Because all
edges leaving (or entering) a knot share that slope, any path traced through
the graph is a C1 piecewise cubic.

Edge layers are kept in three arrays shaped like the cost matrices:
``start`` (B, N, ...), ``inner`` (B, M-1, N, N, ...) and ``goal`` (B, N, G, ...).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .config_space import PROBE_CHUNK, World
from .graph import GoalSet, PlannerParams, sample_waypoints
from .planner import CostMatrices, PlanResult, check_endpoints, trace_path, value_iteration

# Weight sums below this fall back to the plain average of the two chords.
WEIGHT_EPS = 1e-12


def uniform_knots(M: int) -> np.ndarray:
    return np.arange(M + 2) / (M + 1)


@dataclass
class SlopeTensor:
    """Chord slope of every graph edge, grouped by edge layer."""

    start: np.ndarray
    inner: np.ndarray
    goal: np.ndarray

    @property
    def M(self) -> int:
        return self.inner.shape[1] + 1


@dataclass
class SplineCoefficients:
    """Cubic coefficients per edge; axis ``-2`` holds ``a, b, c, d``."""

    start: np.ndarray
    inner: np.ndarray
    goal: np.ndarray
    knots: np.ndarray


def chord_slopes(q0, Q: np.ndarray, goals: GoalSet, knots: np.ndarray) -> SlopeTensor:
    q0 = np.asarray(q0, dtype=float)
    Q = np.asarray(Q, dtype=float)
    h = np.diff(knots)
    M = Q.shape[1]
    if h.size != M + 1 or np.any(h <= 0):
        raise ValueError("knots must be M+2 strictly increasing values")
    start = (Q[:, 0] - q0) / h[0]
    inner = (Q[:, 1:, None, :, :] - Q[:, :-1, :, None, :]) / h[1:-1, None, None, None]
    goal = (goals.values[None, None, :, :] - Q[:, -1, :, None, :]) / h[-1]
    return SlopeTensor(start, inner, goal)


def mean_chord_slopes(slopes: SlopeTensor) -> np.ndarray:
    """Average chord slope of each edge layer, shape (B, M+1, d)."""
    B, d = slopes.start.shape[0], slopes.start.shape[-1]
    out = np.empty((B, slopes.M + 1, d))
    out[:, 0] = slopes.start.mean(axis=1)
    out[:, 1:-1] = slopes.inner.mean(axis=(2, 3))
    out[:, -1] = slopes.goal.mean(axis=(1, 2))
    return out


def makima_blend(left, right, left_outer, right_outer):
    """Modified-Akima slope from the chords either side of a knot.

    ``left``/``right`` are the chords immediately before/after the knot and
    ``left_outer``/``right_outer`` the next ones out. Applied component-wise.
    """
    w_right = np.abs(right_outer - right) + 0.5 * np.abs(right_outer + right)
    w_left = np.abs(left - left_outer) + 0.5 * np.abs(left + left_outer)
    denom = w_right + w_left
    flat = denom < WEIGHT_EPS
    safe = np.where(flat, 1.0, denom)
    blended = (w_right * left + w_left * right) / safe
    return np.where(flat, 0.5 * (left + right), blended)


def layer_slopes(slopes: SlopeTensor) -> np.ndarray:
    """Spline slope at every knot, shape (B, M+2, d).

    The two knots at each end use the averaged-chord end rules; interior
    knots blend each pair of consecutive inner edges against the averaged
    outer chords and average the result over the layer.
    """
    M = slopes.M
    mbar = mean_chord_slopes(slopes)
    B, _, d = mbar.shape
    s = np.empty((B, M + 2, d))
    for k in range(2, M):
        left = slopes.inner[:, k - 2]
        right = slopes.inner[:, k - 1]
        left_outer = mbar[:, k - 2, None, None, :]
        right_outer = mbar[:, k + 1, None, None, :]
        s[:, k] = makima_blend(left, right, left_outer, right_outer).mean(axis=(1, 2))
    s[:, 0] = mbar[:, 0]
    s[:, 1] = 0.5 * (mbar[:, 0] + mbar[:, 1])
    s[:, M] = 0.5 * (mbar[:, M] + mbar[:, M - 1])
    s[:, M + 1] = mbar[:, M]
    return s


def edge_coefficients(src, chord, s0, s1, h) -> np.ndarray:
    """Cubic Hermite coefficients ``(a, b, c, d)`` stacked on axis -2."""
    src, chord, s0, s1 = np.broadcast_arrays(
        np.asarray(src, float), np.asarray(chord, float), np.asarray(s0, float), np.asarray(s1, float)
    )
    a = src
    b = s0
    c = (3.0 * chord - 2.0 * s0 - s1) / h
    d = (s0 + s1 - 2.0 * chord) / (h * h)
    return np.stack([a, b, c, d], axis=-2)


def spline_coefficients(q0, Q: np.ndarray, goals: GoalSet, s: np.ndarray, knots: np.ndarray, slopes=None) -> SplineCoefficients:
    q0 = np.asarray(q0, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if slopes is None:
        slopes = chord_slopes(q0, Q, goals, knots)
    h = np.diff(knots)
    B = Q.shape[0]
    start = edge_coefficients(
        np.broadcast_to(q0, Q[:, 0].shape), slopes.start, s[:, 0, None, :], s[:, 1, None, :], h[0]
    )
    inner = edge_coefficients(
        Q[:, :-1, :, None, :],
        slopes.inner,
        s[:, 1:-2, None, None, :],
        s[:, 2:-1, None, None, :],
        h[1:-1, None, None, None],
    )
    goal = edge_coefficients(
        Q[:, -1, :, None, :], slopes.goal, s[:, -2, None, None, :], s[:, -1, None, None, :], h[-1]
    )
    assert start.shape[0] == B
    return SplineCoefficients(start, inner, goal, np.asarray(knots, dtype=float))


def _poly(coeffs: np.ndarray, tau, derivative_order: int = 0):
    a, b, c, d = (coeffs[..., k, :] for k in range(4))
    tau = np.asarray(tau, dtype=float)[..., None]
    if derivative_order == 0:
        return ((d * tau + c) * tau + b) * tau + a
    if derivative_order == 1:
        return (3.0 * d * tau + 2.0 * c) * tau + b
    raise ValueError("derivative_order must be 0 or 1")


def evaluate_spline(coeffs, t0: float, t1: float, t: float, derivative_order: int = 0) -> np.ndarray:
    """Value or first derivative of one edge cubic at parameter ``t``."""
    if not t0 <= t <= t1:
        raise ValueError(f"t={t} outside the edge interval [{t0}, {t1}]")
    return _poly(np.asarray(coeffs, dtype=float), t - t0, derivative_order)


def _quadrature_nodes(h, H: int):
    dt = h / H
    return (np.arange(H) + 0.5) * dt, dt


def batch_akima_edge_cost(world: World, coeffs: np.ndarray, h: float, H: int) -> np.ndarray:
    """Spline edge cost for coefficient arrays of shape (..., 4, d).

    Arc length by the midpoint rule at ``H`` equidistant parameters. The same
    parameters plus both interval ends are collision probes; any hit makes the
    edge cost infinite.
    """
    if H < 2:
        raise ValueError("at least two probes per edge are required")
    coeffs = np.asarray(coeffs, dtype=float)
    lead = coeffs.shape[:-2]
    tau, dt = _quadrature_nodes(h, H)
    probe_tau = np.concatenate([[0.0], tau, [h]])
    flat = coeffs.reshape((-1,) + coeffs.shape[-2:])
    out = np.empty(flat.shape[0])
    step = max(1, PROBE_CHUNK // (H + 2))
    for start in range(0, flat.shape[0], step):
        chunk = flat[start : start + step, None]
        speed = np.sqrt(np.sum(_poly(chunk, tau, 1) ** 2, axis=-1))
        length = np.sum(speed, axis=-1) * dt
        hit = world.in_collision(_poly(chunk, probe_tau, 0)).any(axis=-1)
        out[start : start + step] = np.where(hit, np.inf, length)
    return out.reshape(lead)


def akima_edge_cost(world: World, coeffs, h: float, H: int) -> float:
    return float(batch_akima_edge_cost(world, np.asarray(coeffs, dtype=float)[None], h, H)[0])


def build_akima_cost_matrices(world: World, q0, Q: np.ndarray, goals: GoalSet, H: int, knots=None):
    """Spline edge costs for every graph edge; also returns knot slopes (B, M+2, d)."""
    q0 = np.asarray(q0, dtype=float)
    Q = np.asarray(Q, dtype=float)
    B, M, N, d = Q.shape
    knots = uniform_knots(M) if knots is None else np.asarray(knots, dtype=float)
    h = np.diff(knots)
    G = len(goals)
    C_s = np.empty((B, N))
    C_h = np.empty((B, M - 1, N, N))
    C_l = np.empty((B, N, G))
    s_all = np.empty((B, M + 2, d))
    per_entry = (N + (M - 1) * N * N + N * G) * 4 * (H + 2)
    step = max(1, (4 * PROBE_CHUNK) // per_entry)
    for b0 in range(0, B, step):
        sl = slice(b0, b0 + step)
        slopes = chord_slopes(q0, Q[sl], goals, knots)
        s = layer_slopes(slopes)
        coeffs = spline_coefficients(q0, Q[sl], goals, s, knots, slopes)
        s_all[sl] = s
        C_s[sl] = batch_akima_edge_cost(world, coeffs.start, h[0], H)
        for m in range(M - 1):
            C_h[sl, m] = batch_akima_edge_cost(world, coeffs.inner[:, m], h[m + 1], H)
        C_l[sl] = batch_akima_edge_cost(world, coeffs.goal, h[-1], H)
    return CostMatrices(C_s, C_h, C_l), s_all


def traced_coefficients(q0, Q: np.ndarray, goals: GoalSet, s: np.ndarray, knots: np.ndarray, result: PlanResult) -> np.ndarray:
    """Coefficients of the traced edges, shape (B, M+1, 4, d)."""
    h = np.diff(knots)
    pts = result.paths
    chords = (pts[:, 1:] - pts[:, :-1]) / h[None, :, None]
    return edge_coefficients(pts[:, :-1], chords, s[:, :-1], s[:, 1:], h[None, :, None])


def plan_akima(world: World, q0, goals: GoalSet, params: PlannerParams, knots=None) -> PlanResult:
    """Plan over the spline graph; traced paths come with their cubics."""
    q0 = np.asarray(q0, dtype=float)
    check_endpoints(world, q0, goals)
    t0 = time.perf_counter()
    knots = uniform_knots(params.M) if knots is None else np.asarray(knots, dtype=float)
    Q = sample_waypoints(params, world.limits)
    costs, s = build_akima_cost_matrices(world, q0, Q, goals, params.H, knots)
    values = value_iteration(costs, goals)
    result = trace_path(costs, values, Q, goals, q0)
    result.knots = knots
    result.spline_coeffs = traced_coefficients(q0, Q, goals, s, knots, result)
    result.plan_time = time.perf_counter() - t0
    return result


def sample_spline(knots: np.ndarray, coeffs: np.ndarray, per_edge: int = 20) -> np.ndarray:
    """Dense polyline through one traced spline, knots included.

    ``coeffs`` has shape (M+1, 4, d); returns ``(M+1)*per_edge + 1`` points.
    """
    knots = np.asarray(knots, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    pts = []
    for e, (t0, t1) in enumerate(zip(knots[:-1], knots[1:])):
        tau = np.arange(per_edge) / per_edge * (t1 - t0)
        pts.append(_poly(coeffs[e], tau, 0))
    last = coeffs[-1]
    pts.append(_poly(last, np.array([knots[-1] - knots[-2]]), 0))
    return np.concatenate(pts, axis=0)
