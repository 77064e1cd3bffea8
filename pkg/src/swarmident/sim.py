"""Deterministic 2D kinematic swarm simulator.

Disk-shaped differential-drive robots and passive cylindrical objects in an
unbounded plane. Robots sense with a forward line-of-sight ray (optionally
widened to an angular sector), move on exact circular arcs every physics
substep, and resolve disk overlaps by positional projection. All motion is a
pure function of (config, seed, controllers).
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels as kernels
from .config import WorldConfig
from .rng import derive_rng

MAX_INIT_ATTEMPTS = 10_000
OVERLAP_TOL = 1e-6
MAX_PROJECTION_SWEEPS = 8


class OverDenseError(RuntimeError):
    """The initial square cannot fit all bodies without overlap."""


class BodyKind(IntEnum):
    AGENT = 0
    REPLICA = 1
    OBJECT = 2


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float  # radians in [-pi, pi)


@dataclass(frozen=True)
class Body:
    pose: Pose
    radius: float
    mass: float
    kind: BodyKind
    wheel_command: tuple[float, float]
    last_pose: Pose


def wrap_angle(a: float) -> float:
    """Normalize an angle into [-pi, pi)."""
    return kernels.wrap_angle(a)


def wrap_angles(a: np.ndarray) -> np.ndarray:
    return np.mod(np.asarray(a, dtype=float) + math.pi, 2.0 * math.pi) - math.pi


class WorldState:
    """Array-backed world snapshot; bodies keep a fixed order for the trial."""

    def __init__(self, x, y, heading, radius, mass, kinds, rng,
                 sensor_state_count: int):
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        self.heading = np.ascontiguousarray(heading, dtype=np.float64)
        self.radius = np.ascontiguousarray(radius, dtype=np.float64)
        self.mass = np.ascontiguousarray(mass, dtype=np.float64)
        self.kinds = np.ascontiguousarray(kinds, dtype=np.int64)
        self.rng = rng
        self.sensor_state_count = int(sensor_state_count)
        self.time = 0.0
        self.last_x = self.x.copy()
        self.last_y = self.y.copy()
        self.last_heading = self.heading.copy()
        self.last_commands = np.zeros((len(self.kinds), 2), dtype=np.float64)
        n_robots = int(np.sum(self.kinds != BodyKind.OBJECT))
        # Recurrent-controller hidden state, confined to this trial.
        self.ctrl_hidden = np.zeros((n_robots, 16), dtype=np.float64)
        # Sensor readings not yet acted on (sensor latency FIFO).
        self.pending_states = np.zeros((8, n_robots), dtype=np.int64)
        self.pending_len = 0

    @property
    def n_bodies(self) -> int:
        return len(self.kinds)

    @property
    def robot_indices(self) -> np.ndarray:
        return np.flatnonzero(self.kinds != BodyKind.OBJECT)

    @property
    def bodies(self) -> list[Body]:
        out = []
        for i in range(self.n_bodies):
            out.append(Body(
                pose=Pose(float(self.x[i]), float(self.y[i]), float(self.heading[i])),
                radius=float(self.radius[i]),
                mass=float(self.mass[i]),
                kind=BodyKind(int(self.kinds[i])),
                wheel_command=(float(self.last_commands[i, 0]),
                               float(self.last_commands[i, 1])),
                last_pose=Pose(float(self.last_x[i]), float(self.last_y[i]),
                               float(self.last_heading[i])),
            ))
        return out

    def copy(self) -> "WorldState":
        dup = WorldState(self.x.copy(), self.y.copy(), self.heading.copy(),
                         self.radius.copy(), self.mass.copy(), self.kinds.copy(),
                         copy.deepcopy(self.rng), self.sensor_state_count)
        dup.time = self.time
        dup.last_x = self.last_x.copy()
        dup.last_y = self.last_y.copy()
        dup.last_heading = self.last_heading.copy()
        dup.last_commands = self.last_commands.copy()
        dup.ctrl_hidden = self.ctrl_hidden.copy()
        dup.pending_states = self.pending_states.copy()
        dup.pending_len = self.pending_len
        return dup


def _interleaved_kinds(config: WorldConfig) -> np.ndarray:
    """Body order: replicas spread evenly among agents, objects last."""
    n_a, n_r = config.n_agents, config.n_replicas
    total = n_a + n_r
    kinds = []
    placed_r = 0
    for i in range(total):
        want_r = ((i + 1) * n_r) // total
        if want_r > placed_r:
            kinds.append(BodyKind.REPLICA)
            placed_r += 1
        else:
            kinds.append(BodyKind.AGENT)
    kinds.extend([BodyKind.OBJECT] * config.n_objects)
    return np.array(kinds, dtype=np.int64)


def initialize_world(config: WorldConfig, seed: int) -> WorldState:
    """Place bodies uniformly in the init square with no initial overlaps.

    Overlapping draws are rejected and only the offending body is resampled;
    an over-dense configuration fails after MAX_INIT_ATTEMPTS rejections.
    """
    config.validate()
    rng = derive_rng(seed)
    kinds = _interleaved_kinds(config)
    n = len(kinds)
    robot_r = config.body_diameter / 2.0
    object_r = config.object_diameter / 2.0
    radius = np.where(kinds == BodyKind.OBJECT, object_r, robot_r)
    mass = np.where(kinds == BodyKind.OBJECT, config.object_mass,
                    config.robot_mass)
    half = config.init_square_side / 2.0

    xs = np.empty(n)
    ys = np.empty(n)
    for i in range(n):
        for _ in range(MAX_INIT_ATTEMPTS):
            px, py = rng.uniform(-half, half, size=2)
            ok = True
            for j in range(i):
                dx = px - xs[j]
                dy = py - ys[j]
                rsum = radius[i] + radius[j]
                if dx * dx + dy * dy < rsum * rsum:
                    ok = False
                    break
            if ok:
                xs[i] = px
                ys[i] = py
                break
        else:
            raise OverDenseError(
                f"could not place body {i} of {n} in a square of side "
                f"{config.init_square_side} after {MAX_INIT_ATTEMPTS} attempts")
    headings = rng.uniform(-math.pi, math.pi, size=n)

    return WorldState(xs, ys, headings, radius, mass, kinds, rng,
                      config.sensor_state_count)


def sense_line_of_sight(world: WorldState, observer_index: int) -> int:
    """State code of the first body hit by the observer's forward ray."""
    if world.kinds[observer_index] == BodyKind.OBJECT:
        raise ValueError("objects do not sense")
    return int(kernels.sense(world.x, world.y, world.heading, world.radius,
                             world.kinds, observer_index, 0.0,
                             world.sensor_state_count))


def sense_sector(world: WorldState, observer_index: int, theta: float) -> int:
    """Sector sensing with field of view theta; theta = 0 is the plain ray."""
    if world.kinds[observer_index] == BodyKind.OBJECT:
        raise ValueError("objects do not sense")
    if not 0.0 <= theta <= 2.0 * math.pi:
        raise ValueError("theta must lie in [0, 2*pi]")
    return int(kernels.sense(world.x, world.y, world.heading, world.radius,
                             world.kinds, observer_index, theta,
                             world.sensor_state_count))


def _run_cycles(world: WorldState, config: WorldConfig, agent_controller,
                replica_controller, n_cycles: int):
    a_is_net, a_params, a_h, a_fov = agent_controller.kernel_spec()
    r_is_net, r_params, r_h, r_fov = replica_controller.kernel_spec()
    n_robots = len(world.robot_indices)
    noise = world.rng.uniform(config.wheel_noise_low, config.wheel_noise_high,
                              size=(n_cycles, n_robots, 2))
    traj = np.empty((n_cycles + 1, world.n_bodies, 3), dtype=np.float64)
    states = np.empty((n_cycles, n_robots), dtype=np.int64)
    scratch = np.zeros(16, dtype=np.float64)
    delay = config.sensor_latency_cycles
    if delay >= world.pending_states.shape[0]:
        grown = np.zeros((delay + 1, n_robots), dtype=np.int64)
        grown[:world.pending_states.shape[0]] = world.pending_states
        world.pending_states = grown
    world.pending_len = kernels.run_trial(
        world.x, world.y, world.heading, world.radius, world.mass, world.kinds,
        a_is_net, a_params, a_h, a_fov,
        r_is_net, r_params, r_h, r_fov,
        config.sensor_state_count, n_cycles, config.substeps,
        config.physics_dt, config.max_speed, config.inter_wheel_distance,
        OVERLAP_TOL, MAX_PROJECTION_SWEEPS,
        config.object_static_friction, config.friction_unit_factor, delay,
        noise, traj, states, world.ctrl_hidden, scratch,
        world.pending_states, world.pending_len)
    world.time += n_cycles * config.control_dt
    world.last_x[:] = traj[-2, :, 0]
    world.last_y[:] = traj[-2, :, 1]
    world.last_heading[:] = traj[-2, :, 2]
    return traj, states


def step_trial(world: WorldState, config: WorldConfig, agent_controller,
               replica_controller) -> WorldState:
    """Advance one control cycle (sense, command, noise, substeps) in place."""
    _run_cycles(world, config, agent_controller, replica_controller, 1)
    return world


def run_trial(world: WorldState, config: WorldConfig, agent_controller,
              replica_controller):
    """Run a whole trial; returns (trajectory, sensor_states).

    trajectory has shape (control_steps + 1, n_bodies, 3) with columns
    (x, y, heading) recorded at every control boundary; sensor_states has
    shape (control_steps, n_robots) in robot order.
    """
    return _run_cycles(world, config, agent_controller, replica_controller,
                       config.control_steps)


def extract_speeds(trajectory, control_dt: float) -> np.ndarray:
    """Per-step (linear, angular) speeds from a pose sequence.

    Linear speed is the chord length over control_dt, signed positive when
    the angle between the heading at the start of the step and the motion
    direction is below pi/2, negative otherwise. Angular speed is the
    wrapped heading difference over control_dt. Output has one row fewer
    than the trajectory.
    """
    arr = np.asarray(trajectory, dtype=float)
    if arr.ndim == 1 or (arr.ndim == 2 and arr.shape[0] < 2):
        raise ValueError("trajectory needs at least 2 poses")
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("trajectory must be a (T, 3) array of (x, y, heading)")
    dx = np.diff(arr[:, 0])
    dy = np.diff(arr[:, 1])
    dist = np.hypot(dx, dy)
    h0 = arr[:-1, 2]
    along = np.cos(h0) * dx + np.sin(h0) * dy
    sign = np.where(along > 0.0, 1.0, -1.0)
    s = sign * dist / control_dt
    omega = wrap_angles(np.diff(arr[:, 2])) / control_dt
    return np.stack([s, omega], axis=1)


def body_trajectory(trajectory: np.ndarray, body: int) -> np.ndarray:
    return trajectory[:, body, :]


def poses_to_array(poses: Sequence[Pose]) -> np.ndarray:
    return np.array([[p.x, p.y, p.heading] for p in poses], dtype=float)


def write_trajectory_csv(path: str | Path, trial: int, trajectory: np.ndarray,
                         kinds: np.ndarray) -> None:
    """Debug dump: one row per (step, body), floats with 9 significant digits."""
    traj = np.asarray(trajectory)
    with open(path, "w") as fh:
        fh.write("trial,step,body,kind,x,y,heading\n")
        for step in range(traj.shape[0]):
            for b in range(traj.shape[1]):
                fh.write(f"{trial},{step},{b},{int(kinds[b])},"
                         f"{traj[step, b, 0]:.9g},{traj[step, b, 1]:.9g},"
                         f"{traj[step, b, 2]:.9g}\n")
