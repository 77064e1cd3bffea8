"""Experiment configuration: schema, validation, TOML round-trip, presets."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

CASE_STUDIES = ("aggregation", "clustering", "random_reactive",
                "fov_morphology", "black_box")
ENGINES = ("adversarial", "metric")
REPLICA_MODES = ("mixed", "separated")

# Sensor-state count is fixed by the case study.
_CASE_SENSOR_STATES = {
    "aggregation": 2,
    "clustering": 3,
    "random_reactive": 2,
    "fov_morphology": 2,
    "black_box": 2,
}


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class WorldConfig:
    n_agents: int = 10
    n_replicas: int = 1
    n_objects: int = 0
    init_square_side: float = 331.66
    trial_duration: float = 10.0
    sensor_state_count: int = 2
    body_diameter: float = 7.0
    robot_mass: float = 150.0
    inter_wheel_distance: float = 5.1
    max_speed: float = 12.8
    object_diameter: float = 10.0
    object_mass: float = 35.0
    object_static_friction: float = 0.58
    # Overlap depth (cm) at which the friction proxy balances for unit mass
    # ratio; effectively "any driven contact moves the object".
    friction_unit_factor: float = 1e-6
    control_dt: float = 0.1
    physics_dt: float = 0.01
    wheel_noise_low: float = 0.95
    wheel_noise_high: float = 1.05
    # Control cycles between a sensor reading and the command acting on it
    # (camera capture plus onboard processing, one cycle each).
    sensor_latency_cycles: int = 2

    @property
    def substeps(self) -> int:
        return int(round(self.control_dt / self.physics_dt))

    @property
    def control_steps(self) -> int:
        return int(round(self.trial_duration / self.control_dt))

    @property
    def n_robots(self) -> int:
        return self.n_agents + self.n_replicas

    @property
    def n_bodies(self) -> int:
        return self.n_robots + self.n_objects

    @property
    def max_turn_rate(self) -> float:
        return 2.0 * self.max_speed / self.inter_wheel_distance

    def validate(self) -> None:
        if self.n_agents < 0 or self.n_replicas < 0 or self.n_objects < 0:
            raise ConfigError("world: body counts must be non-negative")
        if self.n_bodies < 1:
            raise ConfigError("world: at least one body required")
        if self.init_square_side <= 0:
            raise ConfigError("world.init_square_side must be positive")
        if self.sensor_state_count not in (2, 3):
            raise ConfigError("world.sensor_states must be 2 or 3")
        if self.body_diameter <= 0 or self.object_diameter <= 0:
            raise ConfigError("world: diameters must be positive")
        if self.robot_mass <= 0 or self.object_mass <= 0:
            raise ConfigError("world: masses must be positive")
        if self.control_dt <= 0 or self.physics_dt <= 0:
            raise ConfigError("world: time steps must be positive")
        ratio = self.control_dt / self.physics_dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError(
                "world.control_dt must be an integer multiple of physics_dt")
        if self.trial_duration <= 0:
            raise ConfigError("world.trial_duration must be positive")
        if not 0.0 < self.wheel_noise_low <= self.wheel_noise_high:
            raise ConfigError("world: bad wheel noise range")
        if self.sensor_latency_cycles < 0:
            raise ConfigError("world.sensor_latency_cycles must be >= 0")


@dataclass(frozen=True)
class PopulationConfig:
    mu: int
    lam: int

    @property
    def size(self) -> int:
        return self.mu + self.lam

    def validate(self, name: str) -> None:
        if self.mu < 1 or self.lam < 1:
            raise ConfigError(f"{name}: mu and lambda must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    case_study: str
    engine: str = "adversarial"
    replica_mode: str = "mixed"
    generations: int = 200
    seed: int = 1
    snapshot_every: int = 50
    output_dir: str = "runs/out"
    world: WorldConfig = field(default_factory=WorldConfig)
    models: PopulationConfig = field(default_factory=lambda: PopulationConfig(10, 10))
    classifiers: PopulationConfig = field(default_factory=lambda: PopulationConfig(10, 10))
    # Case-specific knobs.
    agent_fov: float = 0.0            # fov_morphology: true sensor field of view
    model_hidden: int = 1             # black_box: hidden units of the model net
    truth_seed: int = 0               # random_reactive: seed of the hidden truth
    truth_params: tuple[float, ...] | None = None
    # Evolution-strategy knobs.
    sigma_init: float = 1.0
    sigma_floor: float = 1e-6
    # Classifier input scaling (divide s and omega by their physical maxima).
    scale_classifier_inputs: bool = True

    def validate(self) -> None:
        if self.case_study not in CASE_STUDIES:
            raise ConfigError(
                f"experiment.case_study must be one of {CASE_STUDIES}")
        if self.engine not in ENGINES:
            raise ConfigError(f"experiment.engine must be one of {ENGINES}")
        if self.replica_mode not in REPLICA_MODES:
            raise ConfigError(
                f"experiment.replica_mode must be one of {REPLICA_MODES}")
        if self.generations < 0:
            raise ConfigError("experiment.generations must be >= 0")
        if self.snapshot_every < 1:
            raise ConfigError("experiment.snapshot_every must be >= 1")
        self.models.validate("models")
        if self.engine == "adversarial":
            self.classifiers.validate("classifiers")
        self.world.validate()
        want_n = _CASE_SENSOR_STATES[self.case_study]
        if self.world.sensor_state_count != want_n:
            raise ConfigError(
                f"case study '{self.case_study}' requires "
                f"world.sensor_states = {want_n}")
        if self.case_study == "clustering" and self.world.n_objects < 1:
            raise ConfigError("clustering requires world.n_objects >= 1")
        if self.case_study == "black_box" and self.model_hidden < 1:
            raise ConfigError("case.model_hidden must be >= 1")
        if not 0.0 <= self.agent_fov <= 2.0 * math.pi:
            raise ConfigError("case.agent_fov must lie in [0, 2*pi]")
        if self.truth_params is not None:
            want = 2 * self.world.sensor_state_count
            if self.case_study == "fov_morphology":
                want += 1
            if len(self.truth_params) != want:
                raise ConfigError(
                    f"case.truth_params must have length {want}")

    def model_genome_length(self) -> int:
        n = self.world.sensor_state_count
        if self.case_study == "fov_morphology":
            return 2 * n + 1
        if self.case_study == "black_box":
            h = self.model_hidden
            return 2 * h + h * h + (h + 1) * 2
        return 2 * n

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()


def _require(tree: dict, section: str, key: str):
    if section not in tree or not isinstance(tree[section], dict):
        raise ConfigError(f"missing required section [{section}]")
    if key not in tree[section]:
        raise ConfigError(f"missing required field '{section}.{key}'")
    return tree[section][key]


def config_from_tree(tree: dict) -> ExperimentConfig:
    """Build and validate an ExperimentConfig from a parsed TOML tree."""
    exp = tree.get("experiment")
    if not isinstance(exp, dict):
        raise ConfigError("missing required section [experiment]")
    for key in ("case_study", "generations", "seed"):
        if key not in exp:
            raise ConfigError(f"missing required field 'experiment.{key}'")

    world_kw = {}
    world_tree = dict(tree.get("world", {}))
    renames = {"sensor_states": "sensor_state_count"}
    if "wheel_noise" in world_tree:
        low, high = world_tree.pop("wheel_noise")
        world_tree["wheel_noise_low"] = low
        world_tree["wheel_noise_high"] = high
    for key, value in world_tree.items():
        field_name = renames.get(key, key)
        if field_name not in WorldConfig.__dataclass_fields__:
            raise ConfigError(f"unknown field 'world.{key}'")
        world_kw[field_name] = value
    world = WorldConfig(**world_kw)

    def pop_cfg(name: str, default: PopulationConfig) -> PopulationConfig:
        sub = tree.get(name)
        if sub is None:
            return default
        if "mu" not in sub or "lambda" not in sub:
            raise ConfigError(f"section [{name}] needs 'mu' and 'lambda'")
        return PopulationConfig(int(sub["mu"]), int(sub["lambda"]))

    case = tree.get("case", {})
    evo = tree.get("evolution", {})
    truth = case.get("truth_params")

    cfg = ExperimentConfig(
        case_study=str(exp["case_study"]),
        engine=str(exp.get("engine", "adversarial")),
        replica_mode=str(exp.get("replica_mode", "mixed")),
        generations=int(exp["generations"]),
        seed=int(exp["seed"]),
        snapshot_every=int(exp.get("snapshot_every", 50)),
        output_dir=str(exp.get("output_dir", "runs/out")),
        world=world,
        models=pop_cfg("models", PopulationConfig(10, 10)),
        classifiers=pop_cfg("classifiers", PopulationConfig(10, 10)),
        agent_fov=float(case.get("agent_fov", 0.0)),
        model_hidden=int(case.get("model_hidden", 1)),
        truth_seed=int(case.get("truth_seed", 0)),
        truth_params=tuple(float(v) for v in truth) if truth is not None else None,
        sigma_init=float(evo.get("sigma_init", 1.0)),
        sigma_floor=float(evo.get("sigma_floor", 1e-6)),
        scale_classifier_inputs=bool(
            tree.get("classifier_io", {}).get("scale_inputs", True)),
    )
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        try:
            tree = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_tree(tree)


def _toml_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def config_to_toml(cfg: ExperimentConfig) -> str:
    """Serialize a config so that parsing it back yields an equal config."""
    w = cfg.world
    lines = [
        "[experiment]",
        f"case_study = {_toml_scalar(cfg.case_study)}",
        f"engine = {_toml_scalar(cfg.engine)}",
        f"replica_mode = {_toml_scalar(cfg.replica_mode)}",
        f"generations = {cfg.generations}",
        f"seed = {cfg.seed}",
        f"snapshot_every = {cfg.snapshot_every}",
        f"output_dir = {_toml_scalar(cfg.output_dir)}",
        "",
        "[models]",
        f"mu = {cfg.models.mu}",
        f"lambda = {cfg.models.lam}",
        "",
        "[classifiers]",
        f"mu = {cfg.classifiers.mu}",
        f"lambda = {cfg.classifiers.lam}",
        "",
        "[world]",
        f"n_agents = {w.n_agents}",
        f"n_replicas = {w.n_replicas}",
        f"n_objects = {w.n_objects}",
        f"init_square_side = {_toml_scalar(w.init_square_side)}",
        f"trial_duration = {_toml_scalar(w.trial_duration)}",
        f"sensor_states = {w.sensor_state_count}",
        f"body_diameter = {_toml_scalar(w.body_diameter)}",
        f"robot_mass = {_toml_scalar(w.robot_mass)}",
        f"inter_wheel_distance = {_toml_scalar(w.inter_wheel_distance)}",
        f"max_speed = {_toml_scalar(w.max_speed)}",
        f"object_diameter = {_toml_scalar(w.object_diameter)}",
        f"object_mass = {_toml_scalar(w.object_mass)}",
        f"object_static_friction = {_toml_scalar(w.object_static_friction)}",
        f"friction_unit_factor = {_toml_scalar(w.friction_unit_factor)}",
        f"control_dt = {_toml_scalar(w.control_dt)}",
        f"physics_dt = {_toml_scalar(w.physics_dt)}",
        f"wheel_noise = [{_toml_scalar(w.wheel_noise_low)}, {_toml_scalar(w.wheel_noise_high)}]",
        f"sensor_latency_cycles = {w.sensor_latency_cycles}",
        "",
        "[case]",
        f"agent_fov = {_toml_scalar(cfg.agent_fov)}",
        f"model_hidden = {cfg.model_hidden}",
        f"truth_seed = {cfg.truth_seed}",
    ]
    if cfg.truth_params is not None:
        lines.append(f"truth_params = {_toml_scalar(list(cfg.truth_params))}")
    lines += [
        "",
        "[evolution]",
        f"sigma_init = {_toml_scalar(cfg.sigma_init)}",
        f"sigma_floor = {_toml_scalar(cfg.sigma_floor)}",
        "",
        "[classifier_io]",
        f"scale_inputs = {_toml_scalar(cfg.scale_classifier_inputs)}",
        "",
    ]
    return "\n".join(lines)


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(config_to_toml(cfg))


def preset_names() -> list[str]:
    root = resources.files("swarmident.presets")
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".toml"))


def load_preset(name: str) -> ExperimentConfig:
    if not name.endswith(".toml"):
        name += ".toml"
    data = resources.files("swarmident.presets").joinpath(name).read_bytes()
    return config_from_tree(tomllib.loads(data.decode()))


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    out = replace(cfg, **kw)
    out.validate()
    return out
