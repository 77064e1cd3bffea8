"""Controller representations executed by agents and replicas.

Reactive controllers are lookup tables from the sensor state to a wheel-speed
pair; the sector-reactive variant adds an inferable field-of-view parameter;
the recurrent variant wraps a small Elman network so behavior can be inferred
without assuming the control structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifier import ElmanNet, sigmoid

# Ground-truth swarm controllers (wheel-speed tables, layout
# v_l0, v_r0, v_l1, v_r1, ...).
AGGREGATION_TRUTH = (-0.7, -1.0, 1.0, -1.0)
CLUSTERING_TRUTH = (0.5, 1.0, 1.0, 0.5, 0.1, 0.5)

TWO_PI = 2.0 * math.pi


def clamp_unit(values) -> np.ndarray:
    return np.clip(np.asarray(values, dtype=float), -1.0, 1.0)


def fov_from_raw(fov_raw: float) -> float:
    """Map an unbounded parameter onto a field of view in (0, 2*pi)."""
    return TWO_PI * sigmoid(fov_raw)


def reactive_output(values, state: int) -> tuple[float, float]:
    """Wheel commands for a sensor state, each clamped to [-1, 1]."""
    values = np.asarray(values, dtype=float)
    n_states = len(values) // 2
    if not 0 <= state < n_states:
        raise IndexError(f"sensor state {state} out of range for {n_states} states")
    vl = float(min(1.0, max(-1.0, values[2 * state])))
    vr = float(min(1.0, max(-1.0, values[2 * state + 1])))
    return vl, vr


def recurrent_output(net: ElmanNet, state: int) -> tuple[float, float]:
    """One forward step of a 1-input, 2-output net; outputs mapped to (-1, 1)."""
    h = net.n_hidden
    xin = float(state)
    new = np.empty(h)
    for k in range(h):
        acc = xin * net.w_in[0, k] + net.w_in[1, k]
        for m in range(h):
            acc += net.hidden[m] * net.w_rec[m, k]
        new[k] = sigmoid(acc)
    net.hidden[:] = new
    accl = net.w_out[h, 0]
    accr = net.w_out[h, 1]
    for m in range(h):
        accl += net.hidden[m] * net.w_out[m, 0]
        accr += net.hidden[m] * net.w_out[m, 1]
    return 2.0 * sigmoid(accl) - 1.0, 2.0 * sigmoid(accr) - 1.0


def random_reactive(seed: int, n_states: int = 2,
                    bounds: tuple[float, float] = (-1.0, 1.0)) -> np.ndarray:
    """Uniform random wheel-speed table, deterministic in the seed."""
    from .rng import derive_rng

    rng = derive_rng(seed, "random-reactive")
    return rng.uniform(bounds[0], bounds[1], size=2 * n_states)


@dataclass(frozen=True)
class ReactiveController:
    """Memoryless sensor-state -> wheel-speed map, optional sector sensor."""

    values: np.ndarray
    fov: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.ascontiguousarray(self.values, dtype=np.float64))

    @property
    def n_states(self) -> int:
        return len(self.values) // 2

    def output(self, state: int) -> tuple[float, float]:
        return reactive_output(self.values, state)

    def kernel_spec(self):
        return 0, self.values, 0, float(self.fov)


@dataclass(frozen=True)
class SectorReactiveController:
    """Reactive table plus an unbounded morphology gene for the field of view."""

    values: np.ndarray
    fov_raw: float

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.ascontiguousarray(self.values, dtype=np.float64))

    @property
    def fov(self) -> float:
        return fov_from_raw(self.fov_raw)

    def output(self, state: int) -> tuple[float, float]:
        return reactive_output(self.values, state)

    def kernel_spec(self):
        return 0, self.values, 0, self.fov


class RecurrentController:
    """Black-box behavior: 1-input, 2-output Elman net driving the wheels."""

    def __init__(self, net: ElmanNet, fov: float = 0.0):
        if net.n_in != 1 or net.n_out != 2:
            raise ValueError("behavior net must have 1 input and 2 outputs")
        self.net = net
        self.fov = fov

    def reset(self) -> None:
        self.net.reset()

    def output(self, state: int) -> tuple[float, float]:
        return recurrent_output(self.net, state)

    def kernel_spec(self):
        return 1, np.ascontiguousarray(self.net.to_flat()), self.net.n_hidden, \
            float(self.fov)


Controller = ReactiveController | SectorReactiveController | RecurrentController


def controller_to_json(ctrl: Controller) -> dict:
    if isinstance(ctrl, SectorReactiveController):
        return {"kind": "sector_reactive",
                "values": [float(v) for v in ctrl.values],
                "fov_raw": float(ctrl.fov_raw)}
    if isinstance(ctrl, RecurrentController):
        return {"kind": "recurrent", "hidden": ctrl.net.n_hidden,
                "values": [float(v) for v in ctrl.net.to_flat()]}
    return {"kind": "reactive", "values": [float(v) for v in ctrl.values],
            "fov": float(ctrl.fov)}


def controller_from_json(obj: dict) -> Controller:
    kind = obj["kind"]
    if kind == "reactive":
        return ReactiveController(np.asarray(obj["values"], dtype=float),
                                  fov=float(obj.get("fov", 0.0)))
    if kind == "sector_reactive":
        return SectorReactiveController(np.asarray(obj["values"], dtype=float),
                                        fov_raw=float(obj["fov_raw"]))
    if kind == "recurrent":
        h = int(obj["hidden"])
        return RecurrentController(ElmanNet.from_flat(obj["values"], 1, h, 2))
    raise ValueError(f"unknown controller kind {kind!r}")


def model_controller(case_study: str, genome, n_states: int,
                     hidden: int = 1) -> Controller:
    """Controller a replica executes for a candidate model genome."""
    genome = np.asarray(genome, dtype=float)
    if case_study == "fov_morphology":
        return SectorReactiveController(genome[:2 * n_states],
                                        fov_raw=float(genome[2 * n_states]))
    if case_study == "black_box":
        return RecurrentController(ElmanNet.from_flat(genome, 1, hidden, 2))
    return ReactiveController(genome)


def effective_model_params(case_study: str, genome, n_states: int) -> np.ndarray | None:
    """Executed parameters for reporting: wheel entries clamped to [-1, 1],
    the morphology gene mapped to its field-of-view angle. Recurrent genomes
    have no direct parameter reading."""
    genome = np.asarray(genome, dtype=float)
    if case_study == "black_box":
        return None
    if case_study == "fov_morphology":
        return np.concatenate([clamp_unit(genome[:2 * n_states]),
                               [fov_from_raw(float(genome[2 * n_states]))]])
    return clamp_unit(genome)


def truth_vector(cfg) -> np.ndarray | None:
    """Ground-truth parameter vector for the configured case study."""
    if cfg.truth_params is not None:
        return np.asarray(cfg.truth_params, dtype=float)
    if cfg.case_study in ("aggregation", "black_box"):
        return np.asarray(AGGREGATION_TRUTH)
    if cfg.case_study == "clustering":
        return np.asarray(CLUSTERING_TRUTH)
    if cfg.case_study == "random_reactive":
        return random_reactive(cfg.truth_seed, cfg.world.sensor_state_count)
    if cfg.case_study == "fov_morphology":
        return np.concatenate([AGGREGATION_TRUTH, [cfg.agent_fov]])
    return None


def truth_controller(cfg) -> ReactiveController:
    """Controller the agents execute for the configured case study."""
    truth = truth_vector(cfg)
    if truth is None:
        raise ValueError(f"no truth controller for case {cfg.case_study!r}")
    n = cfg.world.sensor_state_count
    if cfg.case_study == "fov_morphology":
        return ReactiveController(truth[:2 * n], fov=float(truth[2 * n]))
    return ReactiveController(truth[:2 * n])
