import numpy as np
import pytest
from scipy import stats

from gtmp.config_space import ConfigLimits
from gtmp.graph import GoalSet, PlannerParams, batch_generator, graph_edge_count, sample_waypoints


def test_params_validation():
    for bad in (dict(M=0, N=5), dict(M=2, N=0), dict(M=2, N=5, B=0), dict(M=2, N=5, H=1), dict(M=1, N=1, seed=-1)):
        with pytest.raises(ValueError):
            PlannerParams(**bad)


def test_goal_set_defaults_and_validation():
    gs = GoalSet([[1, 2], [3, 4]])
    assert len(gs) == 2 and gs.dim == 2
    np.testing.assert_array_equal(gs.terminal_costs, [0, 0])
    gs = GoalSet([1, 2])
    assert gs.values.shape == (1, 2)
    with pytest.raises(ValueError):
        GoalSet([[1, 2]], terminal_costs=[-1.0])
    with pytest.raises(ValueError):
        GoalSet([[1, 2]], terminal_costs=[1.0, 2.0])


def test_edge_count():
    assert graph_edge_count(1, 1, 1) == 2
    assert graph_edge_count(3, 4, 2) == 4 + 2 * 16 + 8
    # brute-force enumeration of the layered edge set
    for M, N, G in [(1, 3, 2), (4, 2, 1), (2, 5, 3)]:
        parts = [1] + [N] * M + [G]
        assert graph_edge_count(M, N, G) == sum(a * b for a, b in zip(parts[:-1], parts[1:]))


def test_waypoints_shape_bounds_and_determinism():
    lim = ConfigLimits([-1, 2, 0], [1, 5, 0.5])
    p = PlannerParams(M=4, N=7, B=3, seed=11)
    Q = sample_waypoints(p, lim)
    assert Q.shape == (3, 4, 7, 3)
    assert np.all(Q >= lim.lower) and np.all(Q <= lim.upper)
    np.testing.assert_array_equal(Q, sample_waypoints(p, lim))
    assert not np.array_equal(Q, sample_waypoints(PlannerParams(M=4, N=7, B=3, seed=12), lim))


def test_batch_entries_use_independent_streams():
    lim = ConfigLimits([0, 0], [1, 1])
    Q = sample_waypoints(PlannerParams(M=3, N=5, B=4, seed=2), lim)
    for b in range(4):
        single = sample_waypoints(PlannerParams(M=3, N=5, B=1, seed=2, offset=b), lim)
        np.testing.assert_array_equal(single[0], Q[b])
    # the stream key is (seed, index)
    rng = batch_generator(2, 1)
    np.testing.assert_array_equal(rng.random((3, 5, 2)).reshape(3, 5, 2), Q[1])


def test_waypoints_are_uniform():
    lim = ConfigLimits([0, -2], [4, 2])
    Q = sample_waypoints(PlannerParams(M=5, N=200, B=10, seed=0), lim).reshape(-1, 2)
    for k in range(2):
        u = (Q[:, k] - lim.lower[k]) / (lim.upper[k] - lim.lower[k])
        assert stats.kstest(u, "uniform").pvalue > 1e-3
