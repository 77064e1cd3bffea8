#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-Python fallback.

Times the two hot paths (trial integration and batched classifier
judging) on representative workloads and reports the speedup. Both
backends produce bit-identical results; this script also asserts that.
"""

import time

import numpy as np

from swarmident._kernels import _pure
from swarmident.behaviors import ReactiveController
from swarmident.classifier import classifier_net, scale_pairs
from swarmident.config import WorldConfig
from swarmident.sim import initialize_world

try:
    from swarmident._kernels import _core
except ImportError:
    raise SystemExit("compiled core is not built; run pip install -e . first")


def time_fn(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_trial(mod, cfg, seed):
    world = initialize_world(cfg, seed)
    ctrl = ReactiveController(np.array([-0.7, -1.0, 1.0, -1.0]))
    a = ctrl.kernel_spec()
    steps = cfg.control_steps
    n_robots = cfg.n_robots
    noise = world.rng.uniform(0.95, 1.05, (steps, n_robots, 2))
    x, y, h = world.x.copy(), world.y.copy(), world.heading.copy()

    def run():
        xs, ys, hs = x.copy(), y.copy(), h.copy()
        traj = np.empty((steps + 1, cfg.n_bodies, 3))
        states = np.empty((steps, n_robots), dtype=np.int64)
        hidden = np.zeros((n_robots, 16))
        pending = np.zeros((4, n_robots), dtype=np.int64)
        mod.run_trial(xs, ys, hs, world.radius, world.mass, world.kinds,
                      a[0], a[1], a[2], a[3], a[0], a[1], a[2], a[3],
                      cfg.sensor_state_count, steps, cfg.substeps,
                      cfg.physics_dt, cfg.max_speed, cfg.inter_wheel_distance,
                      1e-6, 8, cfg.object_static_friction,
                      cfg.friction_unit_factor, cfg.sensor_latency_cycles,
                      noise, traj, states, hidden, np.zeros(16), pending, 0)
        return traj

    return time_fn(run)


def bench_judge(mod):
    rng = np.random.default_rng(12345)
    net = classifier_net(rng.normal(size=46))
    samples = scale_pairs(rng.normal(scale=5.0, size=(220, 100, 2)))

    def run():
        out = np.empty(len(samples))
        mod.elman_final_outputs(net.w_in, net.w_rec, net.w_out, samples, out)
        return out

    return time_fn(run)


def main():
    cfg = WorldConfig(n_agents=10, n_replicas=1, trial_duration=10.0)
    print(f"{'workload':<34}{'pure':>12}{'compiled':>12}{'speedup':>10}")

    t_pure, out_pure = bench_trial(_pure, cfg, seed=1)
    t_core, out_core = bench_trial(_core, cfg, seed=1)
    assert np.array_equal(out_pure, out_core), "backend mismatch"
    print(f"{'trial (11 robots, 10 s)':<34}{t_pure * 1e3:>10.2f}ms"
          f"{t_core * 1e3:>10.2f}ms{t_pure / t_core:>9.1f}x")

    t_pure, out_pure = bench_judge(_pure)
    t_core, out_core = bench_judge(_core)
    assert np.array_equal(out_pure, out_core), "backend mismatch"
    print(f"{'judging (220 samples x 100 steps)':<34}{t_pure * 1e3:>10.2f}ms"
          f"{t_core * 1e3:>10.2f}ms{t_pure / t_core:>9.1f}x")


if __name__ == "__main__":
    main()
