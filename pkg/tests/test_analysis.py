import math

import numpy as np
import pytest

from swarmident.analysis import (MannWhitneyResult, dispersion,
                                 largest_cluster_fraction, mann_whitney,
                                 mann_whitney_u, model_error,
                                 post_evaluate_classifiers,
                                 reactive_model_grid, sensor_occupancy)
from swarmident.behaviors import ReactiveController
from swarmident.classifier import classifier_net
from swarmident.config import ExperimentConfig, PopulationConfig, WorldConfig


def test_model_error_zero_for_exact_match():
    err = model_error([-0.7, -1.0, 1.0, -1.0], [-0.7, -1.0, 1.0, -1.0])
    assert np.all(err.ae == 0.0) and err.mae == 0.0


def test_model_error_hand_values():
    err = model_error([-0.6, -1.0, 0.8, -1.0], [-0.7, -1.0, 1.0, -1.0])
    assert np.allclose(err.ae, [0.1, 0.0, 0.2, 0.0])
    assert err.mae == pytest.approx(0.075)


def test_model_error_symmetry_and_permutation(rng):
    a = rng.normal(size=6)
    b = rng.normal(size=6)
    assert model_error(a, b).mae == model_error(b, a).mae
    perm = rng.permutation(6)
    assert model_error(a[perm], b[perm]).mae == pytest.approx(
        model_error(a, b).mae, rel=1e-12)


def test_model_error_length_mismatch():
    with pytest.raises(ValueError):
        model_error([1.0, 2.0], [1.0])


def test_dispersion_basics():
    assert dispersion([[3.0, 4.0], [3.0, 4.0], [3.0, 4.0]]) == 0.0
    d = 6.0
    assert dispersion([[0.0, 0.0], [d, 0.0]]) == pytest.approx(d * d / 4.0)


def test_dispersion_rigid_motion_invariance(rng):
    pts = rng.normal(size=(40, 2)) * 30.0
    base = dispersion(pts)
    shifted = pts + np.array([123.4, -77.1])
    angle = 1.234
    rot = np.array([[math.cos(angle), -math.sin(angle)],
                    [math.sin(angle), math.cos(angle)]])
    rotated = pts @ rot.T
    assert dispersion(shifted) == pytest.approx(base, rel=1e-9)
    assert dispersion(rotated) == pytest.approx(base, rel=1e-9)


def test_largest_cluster_chain_and_split():
    chain = [[i * 7.0, 0.0] for i in range(6)]  # gaps < 2 diameters
    assert largest_cluster_fraction(chain, 7.0) == 1.0
    assert largest_cluster_fraction([[0.0, 0.0], [70.0, 0.0]], 7.0) == 0.5


def union_find_fraction(points, diameter):
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            d = math.hypot(points[j][0] - points[i][0],
                           points[j][1] - points[i][1])
            if d < 2 * diameter:
                parent[find(i)] = find(j)
    sizes = {}
    for i in range(n):
        root = find(i)
        sizes[root] = sizes.get(root, 0) + 1
    return max(sizes.values()) / n


def test_largest_cluster_matches_union_find(rng):
    for _ in range(50):
        pts = rng.uniform(-50, 50, size=(int(rng.integers(2, 25)), 2))
        assert largest_cluster_fraction(pts, 7.0) == \
            union_find_fraction(pts.tolist(), 7.0)


def test_mann_whitney_identical_samples():
    assert mann_whitney_u([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0


def test_mann_whitney_full_separation():
    a = list(range(1, 31))
    b = list(range(31, 61))
    assert mann_whitney_u(a, b) < 0.001


def test_mann_whitney_hand_computed_u():
    # a = {7,3,9,5}, b = {2,4,6,8}: combined ranks 1..8, Ra = 20,
    # so U1 = 16 + 10 - 20 = 6 and U2 = 16 - 6 = 10
    res = mann_whitney([7, 3, 9, 5], [2, 4, 6, 8])
    assert res.u1 == 6.0 and res.u2 == 10.0
    sd = math.sqrt(4 * 4 * 9 / 12.0)
    z = (10.0 - 8.0 - 0.5) / sd
    expected_p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    assert res.p_value == pytest.approx(expected_p, rel=1e-12)


def test_mann_whitney_matches_scipy(rng):
    scipy_stats = pytest.importorskip("scipy.stats")
    for _ in range(30):
        a = rng.normal(size=int(rng.integers(5, 25)))
        b = rng.normal(loc=rng.uniform(-1, 1), size=int(rng.integers(5, 25)))
        ours = mann_whitney(a, b)
        ref = scipy_stats.mannwhitneyu(a, b, alternative="two-sided",
                                       method="asymptotic")
        assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-9)


def test_mann_whitney_empty_rejected():
    with pytest.raises(ValueError):
        mann_whitney_u([], [1.0])


def test_lone_robot_sees_nothing():
    cfg = WorldConfig(n_agents=1, n_replicas=0, init_square_side=50.0,
                      trial_duration=2.0)
    ctrl = ReactiveController(np.array([-0.7, -1.0, 1.0, -1.0]))
    occ = sensor_occupancy(cfg, ctrl, trials=3, seed=4)
    assert occ[0] == 1.0 and occ[1] == 0.0


def _post_eval_cfg(tmp_path):
    return ExperimentConfig(
        case_study="aggregation", generations=1, seed=2,
        output_dir=str(tmp_path / "pe"),
        world=WorldConfig(n_agents=3, n_replicas=1, init_square_side=190.0,
                          trial_duration=2.0, sensor_state_count=2),
        models=PopulationConfig(2, 2), classifiers=PopulationConfig(2, 2))


def test_degenerate_classifiers_score_exactly_half(tmp_path):
    cfg = _post_eval_cfg(tmp_path)
    always_agent = np.zeros(46)
    always_agent[-1] = 60.0
    always_model = np.zeros(46)
    always_model[-1] = -60.0
    nets = [classifier_net(always_agent), classifier_net(always_model)]
    grid = reactive_model_grid(2, 3)[:5]
    acc = post_evaluate_classifiers(nets, cfg, trials=2, seed=3, grid=grid)
    assert acc[0] == 0.5
    assert acc[1] == 0.5


def test_model_grid_shapes():
    grid = reactive_model_grid(2, 5)
    assert grid.shape == (625, 4)
    assert grid.min() == -1.0 and grid.max() == 1.0
    assert len(reactive_model_grid(2, 11)) == 14641


def test_single_classifier_wrapper_matches_batch(tmp_path):
    from swarmident.analysis import post_evaluate_classifier

    cfg = _post_eval_cfg(tmp_path)
    flat = np.zeros(46)
    flat[-1] = 60.0
    net = classifier_net(flat)
    grid = reactive_model_grid(2, 3)[:4]
    single = post_evaluate_classifier(net, cfg, trials=2, seed=3, grid=grid)
    batch = post_evaluate_classifiers([net], cfg, trials=2, seed=3, grid=grid)
    assert single == batch[0] == 0.5
