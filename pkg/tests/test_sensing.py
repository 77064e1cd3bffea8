import math

import numpy as np
import pytest

from swarmident.config import WorldConfig
from swarmident.sim import (initialize_world, sense_line_of_sight,
                            sense_sector, wrap_angle)


def make_world(bodies, n_states=2):
    """bodies: list of (x, y, heading, kind) with standard radii."""
    cfg = WorldConfig(n_agents=len(bodies), n_replicas=0,
                      init_square_side=1000.0, trial_duration=1.0,
                      sensor_state_count=n_states)
    world = initialize_world(cfg, seed=0)
    for i, (x, y, h, kind) in enumerate(bodies):
        world.x[i] = x
        world.y[i] = y
        world.heading[i] = h
        world.kinds[i] = kind
        world.radius[i] = 5.0 if kind == 2 else 3.5
        world.mass[i] = 35.0 if kind == 2 else 150.0
    return world


def brute_force_ray(world, obs):
    """Independent oracle: nearest positive ray-circle intersection."""
    ox, oy = world.x[obs], world.y[obs]
    dx, dy = math.cos(world.heading[obs]), math.sin(world.heading[obs])
    best_t, best = math.inf, -1
    for b in range(world.n_bodies):
        if b == obs:
            continue
        mx, my = world.x[b] - ox, world.y[b] - oy
        proj = mx * dx + my * dy
        c0 = mx * mx + my * my - world.radius[b] ** 2
        disc = proj * proj - c0
        if disc < 0:
            continue
        for t in (proj - math.sqrt(disc), proj + math.sqrt(disc)):
            if t > 0 and t < best_t:
                best_t, best = t, b
                break
    if best < 0:
        return 0
    if world.sensor_state_count == 2:
        return 1
    return 1 if world.kinds[best] == 2 else 2


def brute_force_sector(world, obs, theta):
    """Independent oracle: nearest body whose center bearing lies strictly
    inside the sector."""
    if theta <= 0.0:
        return brute_force_ray(world, obs)
    ox, oy = world.x[obs], world.y[obs]
    best_d, best = math.inf, -1
    for b in range(world.n_bodies):
        if b == obs:
            continue
        mx, my = world.x[b] - ox, world.y[b] - oy
        delta = wrap_angle(math.atan2(my, mx) - world.heading[obs])
        if abs(delta) >= theta / 2.0:
            continue
        d = math.hypot(mx, my)
        if d < best_d:
            best_d, best = d, b
    if best < 0:
        return 0
    if world.sensor_state_count == 2:
        return 1
    return 1 if world.kinds[best] == 2 else 2


def test_ray_hits_robot_dead_ahead():
    world = make_world([(0, 0, 0.0, 0), (50, 0, 0.0, 0)])
    assert sense_line_of_sight(world, 0) == 1


def test_ray_misses_perpendicular_robot():
    world = make_world([(0, 0, 0.0, 0), (0, 50, 0.0, 0)])
    assert sense_line_of_sight(world, 0) == 0


def test_ray_nearest_body_wins_n3():
    world = make_world([(0, 0, 0.0, 0), (20, 0, 0.0, 2), (40, 0, 0.0, 0)],
                       n_states=3)
    assert sense_line_of_sight(world, 0) == 1
    assert brute_force_ray(world, 0) == 1
    # from behind the object, the robot is nearer
    world.heading[2] = math.pi
    assert sense_line_of_sight(world, 2) == 1  # object at 20 from 40
    world2 = make_world([(0, 0, 0.0, 0), (25, 0, 0.0, 0), (40, 0, 0.0, 2)],
                        n_states=3)
    assert sense_line_of_sight(world2, 0) == 2


def test_ray_unlimited_range():
    world = make_world([(0, 0, 0.0, 0), (10000.0, 0, 0.0, 0)])
    assert sense_line_of_sight(world, 0) == 1


def test_ray_matches_brute_force_on_random_worlds(rng):
    cfg = WorldConfig(n_agents=6, n_replicas=1, n_objects=4,
                      init_square_side=150.0, trial_duration=1.0,
                      sensor_state_count=3)
    for trial in range(300):
        world = initialize_world(cfg, seed=trial)
        for obs in world.robot_indices:
            assert sense_line_of_sight(world, int(obs)) == \
                brute_force_ray(world, int(obs))


def test_sector_zero_theta_degenerates_to_ray(rng):
    cfg = WorldConfig(n_agents=5, n_replicas=0, n_objects=3,
                      init_square_side=120.0, trial_duration=1.0,
                      sensor_state_count=3)
    for trial in range(1000):
        world = initialize_world(cfg, seed=trial)
        obs = int(rng.integers(0, 5))
        assert sense_sector(world, obs, 0.0) == sense_line_of_sight(world, obs)


def test_sector_full_circle_sees_behind():
    world = make_world([(0, 0, 0.0, 0), (0, 50, 0.0, 0)])
    assert sense_sector(world, 0, 2 * math.pi) == 1


def test_sector_half_angle_boundary():
    world = make_world([(0, 0, 0.0, 0), (50, 50, 0.0, 0)])
    # bearing to the target is pi/4: outside a pi/2 sector, inside a pi one
    assert sense_sector(world, 0, math.pi / 2) == 0
    assert sense_sector(world, 0, math.pi) == 1


def test_sector_matches_brute_force_on_random_worlds(rng):
    cfg = WorldConfig(n_agents=5, n_replicas=0, n_objects=3,
                      init_square_side=120.0, trial_duration=1.0,
                      sensor_state_count=3)
    for trial in range(300):
        world = initialize_world(cfg, seed=trial)
        theta = float(rng.uniform(0.05, 2 * math.pi))
        obs = int(rng.integers(0, 5))
        assert sense_sector(world, obs, theta) == \
            brute_force_sector(world, obs, theta)


def test_sector_nearest_qualifying_body():
    world = make_world([(0, 0, 0.0, 0), (60, 5, 0.0, 2), (30, -4, 0.0, 0)],
                       n_states=3)
    assert sense_sector(world, 0, math.pi / 2) == 2


def test_object_observers_rejected():
    world = make_world([(0, 0, 0.0, 0), (10, 0, 0.0, 2)], n_states=3)
    with pytest.raises(ValueError):
        sense_line_of_sight(world, 1)
    with pytest.raises(ValueError):
        sense_sector(world, 1, 1.0)


def test_sector_theta_out_of_range():
    world = make_world([(0, 0, 0.0, 0)])
    with pytest.raises(ValueError):
        sense_sector(world, 0, -0.1)
    with pytest.raises(ValueError):
        sense_sector(world, 0, 7.0)
