"""Run artifacts: per-generation CSV log, JSON snapshots, final state."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, config_from_tree, config_to_toml
from .evolution import Individual, Population

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

SNAPSHOT_SCHEMA = 1


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


@dataclass
class GenSummary:
    generation: int
    best_rm: float
    best_rc: float
    best_params: tuple[float, ...]

    def csv_row(self) -> str:
        cells = [str(self.generation), _fmt(self.best_rm), _fmt(self.best_rc)]
        cells += [_fmt(p) for p in self.best_params]
        return ",".join(cells)


@dataclass
class RunResult:
    config: ExperimentConfig
    summaries: list[GenSummary]
    models: Population
    classifiers: Population | None = None


def _population_to_dict(pop: Population | None) -> dict | None:
    if pop is None:
        return None
    return {
        "mu": pop.mu,
        "lambda": pop.lam,
        "genomes": [[float(v) for v in m.genome] for m in pop.members],
        "sigmas": [[float(v) for v in m.sigmas] for m in pop.members],
        "fitness": [None if m.fitness is None else float(m.fitness)
                    for m in pop.members],
    }


def _population_from_dict(obj: dict | None) -> Population | None:
    if obj is None:
        return None
    members = [Individual(np.array(g), np.array(s), f)
               for g, s, f in zip(obj["genomes"], obj["sigmas"], obj["fitness"])]
    return Population(members, int(obj["mu"]), int(obj["lambda"]))


def save_snapshot(path: str | Path, cfg: ExperimentConfig, generation: int,
                  models: Population, classifiers: Population | None) -> None:
    blob = {
        "schema": SNAPSHOT_SCHEMA,
        "config_hash": cfg.config_hash(),
        "config_toml": config_to_toml(cfg),
        "generation": generation,
        "models": _population_to_dict(models),
        "classifiers": _population_to_dict(classifiers),
    }
    Path(path).write_text(json.dumps(blob))


@dataclass
class Snapshot:
    config: ExperimentConfig
    config_hash: str
    generation: int
    models: Population
    classifiers: Population | None


def load_snapshot(path: str | Path) -> Snapshot:
    blob = json.loads(Path(path).read_text())
    if blob.get("schema") != SNAPSHOT_SCHEMA:
        raise ValueError(f"unsupported snapshot schema in {path}")
    cfg = config_from_tree(tomllib.loads(blob["config_toml"]))
    if cfg.config_hash() != blob["config_hash"]:
        raise ValueError(f"snapshot {path} fails its own config hash")
    return Snapshot(cfg, blob["config_hash"], int(blob["generation"]),
                    _population_from_dict(blob["models"]),
                    _population_from_dict(blob["classifiers"]))


class RunWriter:
    """Single writer for one run's output directory.

    The CSV is appended generation by generation and flushed, so a partial
    log survives interruption. When resuming from generation g, rows with
    gen >= g are dropped first so a replayed tail matches an uninterrupted
    run byte for byte.
    """

    def __init__(self, out_dir: str | Path, cfg: ExperimentConfig,
                 param_count: int, resume_from: int | None = None):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.param_count = param_count
        self.csv_path = self.dir / "runlog.csv"
        header = "gen,best_rm,best_rc," + ",".join(
            f"p{i}" for i in range(param_count)) + "\n"
        if resume_from is not None and self.csv_path.exists():
            kept = [header.rstrip("\n")]
            with open(self.csv_path) as fh:
                old_header = fh.readline().rstrip("\n")
                if old_header != kept[0]:
                    raise ValueError("existing runlog.csv has a different schema")
                for line in fh:
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    if int(line.split(",", 1)[0]) < resume_from:
                        kept.append(line)
            self.csv_path.write_text("\n".join(kept) + "\n")
            self._fh = open(self.csv_path, "a")
        else:
            self._fh = open(self.csv_path, "w")
            self._fh.write(header)
            self._fh.flush()

    def append(self, summary: GenSummary) -> None:
        self._fh.write(summary.csv_row() + "\n")
        self._fh.flush()

    def snapshot(self, generation: int, models: Population,
                 classifiers: Population | None) -> None:
        save_snapshot(self.dir / f"snapshot_gen{generation:06d}.json",
                      self.cfg, generation, models, classifiers)

    def write_final_state(self, models: Population,
                          classifiers: Population | None,
                          generation: int | None = None) -> None:
        gen = self.cfg.generations if generation is None else generation
        save_snapshot(self.dir / "final_state.json", self.cfg, gen,
                      models, classifiers)

    def write_final_evaluated(self, models: Population,
                              classifiers: Population | None,
                              generation: int | None = None) -> None:
        gen = self.cfg.generations if generation is None else generation
        save_snapshot(self.dir / "final_evaluated.json", self.cfg, gen,
                      models, classifiers)

    def write_summary(self, payload: dict) -> None:
        (self.dir / "summary.json").write_text(json.dumps(payload, indent=2))

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "RunWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_runlog_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    data = np.array([[float(c) for c in row] for row in rows]) if rows else \
        np.empty((0, len(header)))
    return header, data


def resolve_workers(explicit: int | None = None) -> int:
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get("SWARMIDENT_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return 1


def parallel_map(fn, items, workers: int):
    """Map preserving input order; results are reduced deterministically."""
    if workers <= 1:
        return [fn(item) for item in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
