"""Post-hoc evaluation: parameter errors, emergent-behavior metrics,
classifier post-evaluation, sensor occupancy, and the rank-sum test."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .behaviors import ReactiveController, model_controller, truth_controller
from .classifier import ElmanNet, final_outputs, scale_pairs
from .config import ExperimentConfig, WorldConfig
from .rng import derive_seed
from .runlog import parallel_map
from .sim import BodyKind, extract_speeds, initialize_world, run_trial


@dataclass(frozen=True)
class ModelError:
    ae: np.ndarray
    mae: float


def model_error(candidate, truth) -> ModelError:
    """Elementwise absolute parameter errors and their mean."""
    candidate = np.asarray(candidate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if candidate.shape != truth.shape:
        raise ValueError("parameter vectors differ in length")
    ae = np.abs(candidate - truth)
    return ModelError(ae, float(np.mean(ae)))


def dispersion(positions) -> float:
    """Second moment of positions about their centroid (mean squared
    distance), the emergent-behavior measure used throughout."""
    pts = np.asarray(positions, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("need at least one 2D position")
    centroid = pts.mean(axis=0)
    d = pts - centroid
    return float(np.mean(np.sum(d * d, axis=1)))


def largest_cluster_fraction(positions, body_diameter: float) -> float:
    """Fraction of bodies in the largest cluster; two bodies are adjacent
    when another body of the same diameter cannot fit between them
    (center distance < 2 * diameter)."""
    pts = np.asarray(positions, dtype=float)
    n = pts.shape[0]
    if n < 1:
        raise ValueError("need at least one position")
    threshold = 2.0 * body_diameter
    best = 0
    seen = np.zeros(n, dtype=bool)
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        size = 0
        while stack:
            i = stack.pop()
            size += 1
            for j in range(n):
                if seen[j]:
                    continue
                if np.hypot(pts[j, 0] - pts[i, 0], pts[j, 1] - pts[i, 1]) < threshold:
                    seen[j] = True
                    stack.append(j)
        best = max(best, size)
    return best / n


@dataclass(frozen=True)
class MannWhitneyResult:
    u1: float
    u2: float
    p_value: float


def _rank_with_ties(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def mann_whitney(sample_a, sample_b) -> MannWhitneyResult:
    """Two-sided Mann-Whitney rank test, tie-corrected normal approximation
    with continuity correction."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be nonempty")
    combined = np.concatenate([a, b])
    ranks = _rank_with_ties(combined)
    r1 = ranks[:n1].sum()
    u1 = n1 * n2 + n1 * (n1 + 1) / 2.0 - r1
    u2 = n1 * n2 - u1
    _, counts = np.unique(combined, return_counts=True)
    size = n1 + n2
    if size < 2:
        return MannWhitneyResult(u1, u2, 1.0)
    tie_term = float(np.sum(counts ** 3 - counts))
    t = 1.0 - tie_term / (size ** 3 - size)
    if t == 0.0:
        return MannWhitneyResult(u1, u2, 1.0)
    sd = math.sqrt(t * n1 * n2 * (size + 1) / 12.0)
    big_u = max(u1, u2)
    z = (big_u - n1 * n2 / 2.0 - 0.5) / sd
    if z < 0.0:
        z = 0.0
    p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    return MannWhitneyResult(u1, u2, p)


def mann_whitney_u(sample_a, sample_b) -> float:
    """Two-sided p-value of the rank test."""
    return mann_whitney(sample_a, sample_b).p_value


def sensor_occupancy(world_cfg: WorldConfig, controller, trials: int,
                     seed: int, workers: int = 1) -> np.ndarray:
    """Mean fraction of control steps spent in each sensor state when every
    robot executes the given controller."""
    n_states = world_cfg.sensor_state_count

    def occupancy_one(t: int) -> np.ndarray:
        world = initialize_world(world_cfg, derive_seed(seed, "occupancy", t))
        _, states = run_trial(world, world_cfg, controller, controller)
        return np.bincount(states.ravel(), minlength=n_states).astype(float)

    counts = parallel_map(occupancy_one, range(trials), workers)
    total = np.sum(counts, axis=0)
    return total / total.sum()


def reactive_model_grid(n_states: int, settings: int) -> np.ndarray:
    """All wheel-speed tables on a uniform per-parameter grid over [-1, 1]."""
    values = np.linspace(-1.0, 1.0, settings)
    return np.array(list(itertools.product(values, repeat=2 * n_states)))


def post_evaluate_classifiers(nets: list[ElmanNet], cfg: ExperimentConfig,
                              settings: int = 5, trials: int = 10,
                              seed: int = 0, workers: int = 1,
                              grid: np.ndarray | None = None) -> np.ndarray:
    """Decision accuracy of each classifier over a grid of reactive models.

    Per grid model, `trials` trials are run with the replica among agents
    (initial configurations shared across classifiers). A classifier flags a
    model only when it judges every one of its trials as counterfeit; the
    accuracy weighs the flagged-model fraction and the genuine-samples-
    accepted fraction equally.
    """
    if grid is None:
        grid = reactive_model_grid(cfg.world.sensor_state_count, settings)
    if len(grid) == 0:
        raise ValueError("model grid must be nonempty")
    world_cfg = cfg.world
    agent_ctrl = truth_controller(cfg)
    n_nets = len(nets)

    def evaluate_model(g: int):
        replica_ctrl = ReactiveController(np.asarray(grid[g], dtype=float))
        fake_rows = []
        genuine_rows = []
        for t in range(trials):
            world = initialize_world(world_cfg,
                                     derive_seed(seed, "posteval", t))
            traj, _ = run_trial(world, world_cfg, agent_ctrl, replica_ctrl)
            for b in range(world.n_bodies):
                kind = int(world.kinds[b])
                if kind == BodyKind.OBJECT:
                    continue
                speeds = extract_speeds(traj[:, b, :], world_cfg.control_dt)
                if kind == BodyKind.AGENT:
                    genuine_rows.append(speeds)
                else:
                    fake_rows.append(speeds)
        fake = np.ascontiguousarray(np.stack(fake_rows))
        genuine = np.ascontiguousarray(np.stack(genuine_rows))
        if cfg.scale_classifier_inputs:
            fake = scale_pairs(fake, world_cfg.max_speed, world_cfg.max_turn_rate)
            genuine = scale_pairs(genuine, world_cfg.max_speed,
                                  world_cfg.max_turn_rate)
        flagged = np.empty(n_nets, dtype=np.int64)
        agent_ok = np.empty(n_nets, dtype=np.int64)
        for i, net in enumerate(nets):
            fake_out = final_outputs(net, fake)
            flagged[i] = 1 if np.all(fake_out < 0.5) else 0
            agent_ok[i] = int(np.sum(final_outputs(net, genuine) >= 0.5))
        return flagged, agent_ok, genuine.shape[0]

    per_model = parallel_map(evaluate_model, range(len(grid)), workers)
    flagged_total = np.sum([f for f, _, _ in per_model], axis=0)
    agent_ok_total = np.sum([a for _, a, _ in per_model], axis=0)
    genuine_total = sum(k for _, _, k in per_model)
    model_frac = flagged_total / len(grid)
    agent_frac = agent_ok_total / genuine_total
    return 0.5 * model_frac + 0.5 * agent_frac


def post_evaluate_classifier(net: ElmanNet, cfg: ExperimentConfig,
                             settings: int = 5, trials: int = 10,
                             seed: int = 0, workers: int = 1,
                             grid: np.ndarray | None = None) -> float:
    """Decision accuracy of a single classifier (see the batched variant)."""
    return float(post_evaluate_classifiers([net], cfg, settings=settings,
                                           trials=trials, seed=seed,
                                           workers=workers, grid=grid)[0])


@dataclass
class EmergentComparison:
    agent_final: np.ndarray
    model_final: np.ndarray
    p_value: float
    times: np.ndarray
    agent_dispersion: np.ndarray      # (trials, len(times))
    model_dispersion: np.ndarray
    agent_cluster: np.ndarray
    model_cluster: np.ndarray


def emergent_comparison(cfg: ExperimentConfig, model_genome,
                        group_size: int, n_trials: int, duration: float,
                        seed: int, record_every: int = 10,
                        workers: int = 1,
                        measure_objects: bool = False) -> EmergentComparison:
    """Swarm-level validation of an inferred model.

    Runs equal-sized all-agents and all-replicas swarms from shared initial
    configurations, keeping the template's area per individual, and compares
    final dispersions with the two-sided rank test.
    """
    world = cfg.world
    area_per_individual = world.init_square_side ** 2 / world.n_robots
    side = math.sqrt(area_per_individual * group_size)
    obj_factor = world.n_objects / max(1, world.n_robots)
    n_objects = int(round(obj_factor * group_size)) if measure_objects else 0

    agent_ctrl = truth_controller(cfg)
    replica_ctrl = model_controller(cfg.case_study, model_genome,
                                    world.sensor_state_count, cfg.model_hidden)

    base = replace(world, init_square_side=side, trial_duration=duration,
                   n_objects=n_objects)
    agents_cfg = replace(base, n_agents=group_size, n_replicas=0)
    replicas_cfg = replace(base, n_agents=0, n_replicas=group_size)
    steps = base.control_steps
    record_idx = np.arange(0, steps + 1, record_every)
    times = record_idx * base.control_dt

    def run_group(args):
        trial_cfg, trial = args
        world_state = initialize_world(trial_cfg,
                                       derive_seed(seed, "emergent", trial))
        traj, _ = run_trial(world_state, trial_cfg, agent_ctrl, replica_ctrl)
        if measure_objects:
            sel = world_state.kinds == BodyKind.OBJECT
            diameter = trial_cfg.object_diameter
        else:
            sel = world_state.kinds != BodyKind.OBJECT
            diameter = trial_cfg.body_diameter
        disp = np.array([dispersion(traj[k][sel][:, :2]) for k in record_idx])
        clus = np.array([largest_cluster_fraction(traj[k][sel][:, :2], diameter)
                         for k in record_idx])
        return disp, clus

    agent_runs = parallel_map(run_group,
                              [(agents_cfg, t) for t in range(n_trials)], workers)
    model_runs = parallel_map(run_group,
                              [(replicas_cfg, t) for t in range(n_trials)], workers)
    agent_disp = np.array([d for d, _ in agent_runs])
    model_disp = np.array([d for d, _ in model_runs])
    agent_clus = np.array([c for _, c in agent_runs])
    model_clus = np.array([c for _, c in model_runs])
    p = mann_whitney_u(agent_disp[:, -1], model_disp[:, -1])
    return EmergentComparison(agent_disp[:, -1], model_disp[:, -1], p, times,
                              agent_disp, model_disp, agent_clus, model_clus)
