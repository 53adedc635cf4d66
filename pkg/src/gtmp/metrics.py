"""Path quality and batch diversity metrics.

Paths are ordered point sequences ``(T+1, d)``; for the transport-based
diversity they are viewed as uniform empirical distributions.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.special import logsumexp

DEFAULT_LAMBDA = 5e-3
# Marginal tolerance of the intermediate annealing stages.
ANNEAL_TOL = 1e-3
# Final-stage iterations before pairs that are still unconverged switch to
# Newton-accelerated sweeps.
NEWTON_AFTER = 50
_LINE_SEARCH = 0.5 ** np.arange(12)


class SinkhornNotConverged(RuntimeError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(f"Sinkhorn did not converge after {iterations} iterations (residual {residual:.3e})")
        self.residual = residual
        self.iterations = iterations


def _as_path(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("a path is a non-empty (T+1, d) array")
    return pts


def total_variation(path) -> float:
    """Arc length of the polyline."""
    pts = _as_path(path)
    if pts.shape[0] < 2:
        raise ValueError("total variation needs at least two points")
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=-1)))


def min_cosine_similarity(path) -> float:
    """Worst turn of the polyline as a cosine; zero-length segments are skipped."""
    pts = _as_path(path)
    seg = np.diff(pts, axis=0)
    norm = np.linalg.norm(seg, axis=-1)
    seg = seg[norm > 0] / norm[norm > 0, None]
    if seg.shape[0] == 0:
        raise ValueError("every segment of the path has zero length")
    if seg.shape[0] == 1:
        return 1.0
    cos = np.sum(seg[:-1] * seg[1:], axis=-1)
    return float(np.clip(cos.min(), -1.0, 1.0))


def _semi_dual(g, C, eps, log_a, log_b):
    """Value of the semi-dual objective at ``g`` (any leading axes) and the exact ``f``."""
    f = eps[..., None] * (log_a - logsumexp((g[..., None, :] - C) / eps[..., None, None], axis=-1))
    return np.exp(log_a) * f.sum(axis=-1) + np.exp(log_b) * g.sum(axis=-1), f


def _newton_step(g, C, eps, log_a, log_b):
    """Damped Newton ascent step on the semi-dual in ``g``.

    The Hessian is singular along constant shifts, so its pseudo-inverse is
    used; a backtracking search keeps the objective non-decreasing.
    """
    base, f = _semi_dual(g, C, eps, log_a, log_b)
    P = np.exp((f[:, :, None] + g[:, None, :] - C) / eps[:, None, None])
    col = P.sum(axis=1)
    grad = np.exp(log_b) - col
    hess = (col[:, :, None] * np.eye(col.shape[1]) - np.einsum("pij,pil->pjl", P, P) / np.exp(log_a)) / eps[:, None, None]
    step = np.einsum("pjl,pl->pj", np.linalg.pinv(hess, rcond=1e-12, hermitian=True), grad)
    trial = g[None] + _LINE_SEARCH[:, None, None] * step[None]
    val, _ = _semi_dual(trial, C[None], np.broadcast_to(eps, trial.shape[:2]), log_a, log_b)
    ok = val >= base[None]
    first = np.argmax(ok, axis=0)
    t = np.where(ok.any(axis=0), _LINE_SEARCH[first], 0.0)
    return g + t[:, None] * step


def sinkhorn_batch(X, Y, lam: float = DEFAULT_LAMBDA, tol: float = 1e-6, max_iter: int = 1000):
    """Log-domain Sinkhorn for a stack of uniform point-cloud pairs.

    ``X`` is (P, n, d) and ``Y`` is (P, k, d).  For every pair the
    regularization is annealed geometrically from its largest ground cost down
    to ``lam``, warm-starting the dual potentials; intermediate stages stop at
    a loose marginal error and only the final stage at ``lam`` must reach
    ``tol`` (L1 violation of the row marginals after a column update) within
    ``max_iter`` iterations.

    Near-degenerate couplings make plain sweeps contract very slowly at small
    ``lam``.  Pairs still unconverged after ``NEWTON_AFTER`` final-stage
    iterations precede every further sweep with a damped Newton step on the
    column potentials; the fixed point is unchanged.  Pairs advance
    independently, so each result equals a single-pair run.

    Returns the plans (P, n, k) and ground costs (P, n, k).
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if X.ndim != 3 or Y.ndim != 3 or X.shape[0] != Y.shape[0] or X.shape[2] != Y.shape[2]:
        raise ValueError("expected stacks of paths with a shared dimension")
    P, n, k = X.shape[0], X.shape[1], Y.shape[1]
    C = np.sum((X[:, :, None, :] - Y[:, None, :, :]) ** 2, axis=-1)
    log_a = -np.log(n)
    log_b = -np.log(k)
    a = 1.0 / n
    f = np.zeros((P, n))
    g = np.zeros((P, k))
    eps = np.maximum(0.5 * C.reshape(P, -1).max(axis=1), lam)
    stage_iter = np.zeros(P, dtype=int)
    log_P = np.empty((P, n, k))
    active = np.ones(P, dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        e = eps[idx, None]
        Ci = C[idx]
        gi = g[idx]
        final = eps[idx] == lam
        newton = final & (stage_iter[idx] >= NEWTON_AFTER)
        if newton.any():
            sub = np.flatnonzero(newton)
            gi[sub] = _newton_step(gi[sub], Ci[sub], eps[idx[sub]], log_a, log_b)
        fi = e * (log_a - logsumexp((gi[:, None, :] - Ci) / e[:, :, None], axis=2))
        gi = e * (log_b - logsumexp((fi[:, :, None] - Ci) / e[:, :, None], axis=1))
        lp = (fi[:, :, None] + gi[:, None, :] - Ci) / e[:, :, None]
        f[idx], g[idx], log_P[idx] = fi, gi, lp
        residual = np.sum(np.abs(np.exp(logsumexp(lp, axis=2)) - a), axis=1)
        stage_iter[idx] += 1

        done = np.where(final, residual < tol, residual < ANNEAL_TOL)
        stalled = stage_iter[idx] >= max_iter
        failed = final & stalled & ~done
        if failed.any():
            raise SinkhornNotConverged(float(residual[failed].max()), max_iter)
        active[idx[final & done]] = False
        moved = idx[~final & (done | stalled)]
        eps[moved] = np.maximum(0.5 * eps[moved], lam)
        stage_iter[moved] = 0
    return np.exp(log_P), C


def _ordered_pair(x: np.ndarray, y: np.ndarray):
    if (y.shape, y.tobytes()) < (x.shape, x.tobytes()):
        return y, x
    return x, y


def sinkhorn_distance(p1, p2, lam: float = DEFAULT_LAMBDA, tol: float = 1e-6, max_iter: int = 1000) -> float:
    """Transport cost of the entropic plan under squared Euclidean ground cost.

    The pair is put in a canonical order first, so swapping the arguments
    returns the identical float.
    """
    x, y = _ordered_pair(_as_path(p1), _as_path(p2))
    if x.shape[1] != y.shape[1]:
        raise ValueError("paths must share the configuration dimension")
    P, C = sinkhorn_batch(x[None], y[None], lam, tol, max_iter)
    return float(max(np.sum(P[0] * C[0]), 0.0))


def path_diversity(paths, lam: float = DEFAULT_LAMBDA, tol: float = 1e-6, max_iter: int = 1000) -> float:
    """Mean Sinkhorn distance over all ordered pairs of distinct paths.

    Pairs of paths with equal lengths are solved together in one stack.
    """
    paths = [_as_path(p) for p in paths]
    B = len(paths)
    if B < 2:
        raise ValueError("path diversity needs at least two paths")
    groups: dict = {}
    for i, j in itertools.combinations(range(B), 2):
        x, y = _ordered_pair(paths[i], paths[j])
        groups.setdefault((x.shape, y.shape), []).append((x, y))
    total = 0.0
    for pairs in groups.values():
        X = np.stack([x for x, _ in pairs])
        Y = np.stack([y for _, y in pairs])
        P, C = sinkhorn_batch(X, Y, lam, tol, max_iter)
        for cost in np.sum(P * C, axis=(1, 2)):
            total += 2.0 * max(float(cost), 0.0)
    return total / (B * (B - 1))


def batch_min_cosim(paths, feasible=None) -> float:
    """Average of per-path minimum cosine similarity over the feasible subset.
    ``nan`` when no path qualifies."""
    paths = np.asarray(paths, dtype=float)
    if feasible is not None:
        paths = paths[np.asarray(feasible, dtype=bool)]
    vals = []
    for p in paths:
        try:
            vals.append(min_cosine_similarity(p))
        except ValueError:
            continue
    return float(np.mean(vals)) if vals else float("nan")
