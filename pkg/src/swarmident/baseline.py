"""Metric-based control experiment.

A single model population is optimized to minimize the summed squared
differences between the replica's and the agents' observed speeds. The
mixture analysis below shows why this collapses: when the sensor inputs of
agent and model are uncorrelated, the least-squares optimum is the constant
controller at the mean output, not the truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .coevolution import run_model_trial
from .evolution import Population, es_step, init_population
from .rng import derive_rng
from .runlog import GenSummary, RunResult, RunWriter, parallel_map, resolve_workers


def metric_error(model_pairs, agent_pairs_list) -> float:
    """Summed squared speed differences of one model sample against every
    agent sample (lower is better); all samples must have equal length."""
    model = np.asarray(model_pairs, dtype=float)
    total = 0.0
    for agent in agent_pairs_list:
        agent = np.asarray(agent, dtype=float)
        if agent.shape != model.shape:
            raise ValueError("sample length mismatch")
        diff = model - agent
        total += float(np.sum(diff * diff))
    return total


def evaluate_metric_generation(models: Population, cfg: ExperimentConfig,
                               generation: int, workers: int = 1) -> np.ndarray:
    """Fitness = -error for every model; assigned in place, returned as array."""
    genomes = [m.genome for m in models.members]

    def eval_one(j: int) -> float:
        genuine, counterfeit = run_model_trial(cfg, generation, j, genomes[j])
        errors = [metric_error(fake, genuine) for fake in counterfeit]
        return -float(np.mean(errors))

    fitness = np.array(parallel_map(eval_one, range(len(genomes)), workers))
    for j, member in enumerate(models.members):
        member.fitness = float(fitness[j])
    return fitness


def run_metric_es(cfg: ExperimentConfig, out: RunWriter | None = None,
                  workers: int | None = None,
                  models: Population | None = None,
                  start_generation: int = 0,
                  end_generation: int | None = None) -> RunResult:
    """Least-squares system identification with the same trial budget and
    variation operator as the adversarial engine."""
    cfg.validate()
    n_workers = resolve_workers(workers)
    if models is None:
        models = init_population(cfg.models.mu, cfg.models.lam,
                                 cfg.model_genome_length(),
                                 derive_rng(cfg.seed, "init", "models"),
                                 cfg.sigma_init)
    end = cfg.generations if end_generation is None else end_generation
    summaries: list[GenSummary] = []
    evaluated_models = models

    for gen in range(start_generation, end):
        if out is not None and gen > 0 and gen % cfg.snapshot_every == 0:
            out.snapshot(gen, models, None)
        fitness = evaluate_metric_generation(models, cfg, gen, n_workers)
        best = int(np.argmax(fitness))
        summary = GenSummary(gen, float(fitness[best]), float("nan"),
                             tuple(float(v) for v in models.members[best].genome))
        summaries.append(summary)
        if out is not None:
            out.append(summary)
        evaluated_models = models
        models = es_step(models, derive_rng(cfg.seed, "es", "models", gen),
                         cfg.sigma_floor)

    result = RunResult(cfg, summaries, models, None)
    result.evaluated_models = evaluated_models  # type: ignore[attr-defined]
    result.evaluated_classifiers = None  # type: ignore[attr-defined]
    return result


# --- Least-squares mixture analysis ----------------------------------------
#
# Two independent binary random variables X and Y take (x1, x2) and (y1, y2)
# with the same probability p for the first value. The expected squared
# difference has a unique global minimum with both x-values collapsed onto
# the mean of Y whenever p is interior.


@dataclass(frozen=True)
class BernoulliMixture:
    p: float   # probability of observing y1 (and x1)
    y1: float
    y2: float

    def validate_interior(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ValueError("mixture probability must lie strictly in (0, 1)")


def expected_sq_error(x1: float, x2: float, mix: BernoulliMixture) -> float:
    """Closed-form E{(X - Y)^2} for independent same-p binary X, Y."""
    p, y1, y2 = mix.p, mix.y1, mix.y2
    q = 1.0 - p
    return (p * p * (x1 - y1) ** 2 + p * q * (x1 - y2) ** 2
            + q * p * (x2 - y1) ** 2 + q * q * (x2 - y2) ** 2)


def mixture_optimum(mix: BernoulliMixture) -> tuple[float, float]:
    """Global minimizer of the expected squared error: both values at E{Y}."""
    mix.validate_interior()
    ey = mix.p * mix.y1 + (1.0 - mix.p) * mix.y2
    return ey, ey


def _grid_argmin_1d(f, lo: float, hi: float, n: int) -> float:
    xs = np.linspace(lo, hi, n)
    vals = [f(x) for x in xs]
    return float(xs[int(np.argmin(vals))])


def _refine_1d(f, x0: float, span: float, n: int, rounds: int) -> float:
    x = x0
    for _ in range(rounds):
        x = _grid_argmin_1d(f, x - span, x + span, n)
        span *= 2.0 / (n - 1)
    return x


def mixture_bruteforce(mix: BernoulliMixture, grid: int = 81) -> tuple[float, float]:
    """Independent enumeration oracle: coarse 2-D grid over the value range,
    then alternating per-coordinate grid refinement. Never uses the
    closed-form optimum."""
    mix.validate_interior()
    lo = min(mix.y1, mix.y2) - 0.5
    hi = max(mix.y1, mix.y2) + 0.5
    xs = np.linspace(lo, hi, grid)
    best = (float("inf"), 0.0, 0.0)
    for a in xs:
        for b in xs:
            d = expected_sq_error(float(a), float(b), mix)
            if d < best[0]:
                best = (d, float(a), float(b))
    _, x1, x2 = best
    span = (hi - lo) / (grid - 1)
    for _ in range(8):
        x1 = _refine_1d(lambda v: expected_sq_error(v, x2, mix), x1, span, 41, 4)
        x2 = _refine_1d(lambda v: expected_sq_error(x1, v, mix), x2, span, 41, 4)
        span *= 0.01
    return x1, x2


def multi_expected_sq_error(x, probs, ys) -> float:
    """n-value generalization: E{(X - Y)^2} for independent X, Y sharing the
    same categorical distribution over indices."""
    x = np.asarray(x, dtype=float)
    probs = np.asarray(probs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    total = 0.0
    for i in range(len(probs)):
        for j in range(len(probs)):
            total += probs[i] * probs[j] * (x[i] - ys[j]) ** 2
    return total


def multi_optimum(probs, ys) -> np.ndarray:
    """All coordinates collapse onto E{Y}."""
    probs = np.asarray(probs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(probs <= 0.0) or np.any(probs >= 1.0):
        raise ValueError("probabilities must lie strictly in (0, 1)")
    ey = float(np.sum(probs * ys))
    return np.full(len(probs), ey)


def sequence_expected_sq_error(x1: float, x2: float, p_seq, y1: float,
                               y2: float) -> float:
    """Summed expected squared error over a sequence of step probabilities."""
    return float(sum(expected_sq_error(x1, x2, BernoulliMixture(float(p), y1, y2))
                     for p in p_seq))


def sequence_optimum(p_seq, y1: float, y2: float) -> tuple[float, float]:
    """Minimizer under nonstationary step probabilities p_t."""
    p = np.asarray(p_seq, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("all step probabilities must lie strictly in (0, 1)")
    sp = p.sum()
    sq = (1.0 - p).sum()
    x1 = (np.sum(p * p) / sp) * y1 + (np.sum(p * (1.0 - p)) / sp) * y2
    x2 = (np.sum(p * (1.0 - p)) / sq) * y1 + (np.sum((1.0 - p) ** 2) / sq) * y2
    return float(x1), float(x2)
