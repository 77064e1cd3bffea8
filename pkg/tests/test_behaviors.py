import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmident.analysis import dispersion
from swarmident.behaviors import (AGGREGATION_TRUTH, CLUSTERING_TRUTH,
                                  ReactiveController, RecurrentController,
                                  SectorReactiveController, clamp_unit,
                                  controller_from_json, controller_to_json,
                                  fov_from_raw, random_reactive,
                                  reactive_output, recurrent_output)
from swarmident.classifier import ElmanNet
from swarmident.config import WorldConfig
from swarmident.sim import initialize_world, run_trial
from swarmident.rng import derive_seed


def test_aggregation_truth_outputs():
    assert reactive_output(AGGREGATION_TRUTH, 0) == (-0.7, -1.0)
    assert reactive_output(AGGREGATION_TRUTH, 1) == (1.0, -1.0)


def test_clustering_truth_outputs():
    assert reactive_output(CLUSTERING_TRUTH, 0) == (0.5, 1.0)
    assert reactive_output(CLUSTERING_TRUTH, 1) == (1.0, 0.5)
    assert reactive_output(CLUSTERING_TRUTH, 2) == (0.1, 0.5)


def test_reactive_output_clamps():
    assert reactive_output([2.3, -1.7, 0.0, 0.5], 0) == (1.0, -1.0)


def test_reactive_out_of_range_state_faults():
    with pytest.raises(IndexError):
        reactive_output(AGGREGATION_TRUTH, 2)
    with pytest.raises(IndexError):
        reactive_output(AGGREGATION_TRUTH, -1)


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4),
       st.integers(0, 1))
def test_clamp_idempotence(values, state):
    clamped = clamp_unit(values)
    assert reactive_output(values, state) == reactive_output(clamped, state)


def test_zero_recurrent_network_outputs_zero():
    net = ElmanNet.zeros(1, 3, 2)
    assert recurrent_output(net, 0) == (0.0, 0.0)
    assert recurrent_output(net, 1) == (0.0, 0.0)


def test_recurrent_steady_state_for_contractive_weights(rng):
    flat = 0.3 * rng.normal(size=ElmanNet.n_params(1, 3, 2))
    net = ElmanNet.from_flat(flat, 1, 3, 2)
    net.reset()
    outs = [recurrent_output(net, 1) for _ in range(20)]
    d_last = math.hypot(outs[19][0] - outs[18][0], outs[19][1] - outs[18][1])
    assert d_last < 1e-6


def test_recurrent_replay_determinism(rng):
    flat = rng.normal(size=ElmanNet.n_params(1, 5, 2))
    net = ElmanNet.from_flat(flat, 1, 5, 2)
    seq = [int(v) for v in rng.integers(0, 2, size=30)]
    net.reset()
    first = [recurrent_output(net, s) for s in seq]
    net.reset()
    second = [recurrent_output(net, s) for s in seq]
    assert first == second


def test_random_reactive_deterministic_and_shaped():
    a = random_reactive(321)
    b = random_reactive(321)
    assert np.array_equal(a, b)
    assert a.shape == (4,)
    assert random_reactive(1, n_states=2).shape == (4,)
    assert random_reactive(1, n_states=3).shape == (6,)
    assert np.all(np.abs(a) <= 1.0)


def test_random_reactive_mean_near_zero():
    samples = np.array([random_reactive(seed) for seed in range(10_000)])
    assert np.all(np.abs(samples.mean(axis=0)) < 0.03)


def test_fov_mapping_monotone_and_bounded():
    # monotone over the float-representable range of the logistic map
    raws = np.linspace(-30, 30, 401)
    fovs = np.array([fov_from_raw(r) for r in raws])
    assert np.all(np.diff(fovs) > 0)
    assert np.all(fovs > 0.0) and np.all(fovs < 2 * math.pi)
    assert fov_from_raw(0.0) == pytest.approx(math.pi)


def test_sector_controller_fov_property():
    ctrl = SectorReactiveController(np.array(AGGREGATION_TRUTH), fov_raw=2.0)
    assert ctrl.fov == pytest.approx(2 * math.pi / (1 + math.exp(-2.0)))
    spec = ctrl.kernel_spec()
    assert spec[0] == 0 and spec[3] == ctrl.fov


def test_controller_json_round_trip(rng):
    ctrls = [
        ReactiveController(np.array(AGGREGATION_TRUTH)),
        SectorReactiveController(np.array(AGGREGATION_TRUTH), fov_raw=-1.5),
        RecurrentController(ElmanNet.from_flat(rng.normal(size=7), 1, 1, 2)),
    ]
    for ctrl in ctrls:
        restored = controller_from_json(controller_to_json(ctrl))
        assert type(restored) is type(ctrl)
        a = ctrl.kernel_spec()
        b = restored.kernel_spec()
        assert a[0] == b[0] and a[2] == b[2] and a[3] == pytest.approx(b[3])
        assert np.allclose(a[1], b[1])


def test_aggregation_truth_reduces_dispersion_over_400s():
    base = WorldConfig()
    side = math.sqrt(50 * base.init_square_side ** 2 / base.n_robots)
    cfg = WorldConfig(n_agents=50, n_replicas=0, init_square_side=side,
                      trial_duration=400.0)
    ctrl = ReactiveController(np.array(AGGREGATION_TRUTH))
    initial, final = [], []
    for t in range(5):
        world = initialize_world(cfg, derive_seed(31, "disp", t))
        initial.append(dispersion(np.stack([world.x, world.y], axis=1)))
        run_trial(world, cfg, ctrl, ctrl)
        final.append(dispersion(np.stack([world.x, world.y], axis=1)))
    assert np.median(final) < np.median(initial)
