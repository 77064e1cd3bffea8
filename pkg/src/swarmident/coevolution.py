"""Adversarial identification engine.

Each generation every candidate model drives a replica in its own trial;
classifiers judge every genuine and counterfeit speed sample; models are
rewarded for being misjudged as genuine, classifiers for judging correctly.
Both populations then take one self-adaptive (mu+lambda) step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .behaviors import model_controller, truth_controller
from .classifier import classifier_net, final_outputs, scale_pairs
from .config import ExperimentConfig
from .evolution import Population, es_step, init_population, ranked_indices
from .rng import derive_rng, derive_seed
from .runlog import GenSummary, RunResult, RunWriter, parallel_map, resolve_workers
from .sim import BodyKind, extract_speeds, initialize_world, run_trial

CLASSIFIER_SHAPE = (2, 5, 1)
CLASSIFIER_GENOME_LENGTH = 46


def run_model_trial(cfg: ExperimentConfig, generation: int, model_index: int,
                    genome) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Run the trial(s) for one candidate model.

    Returns (genuine, counterfeit) lists of (T, 2) speed-sample arrays, in
    body order. In mixed mode the replica moves among the agents; in
    separated mode one all-agents trial and one equal-sized all-replicas
    trial are run instead.
    """
    world_cfg = cfg.world
    agent_ctrl = truth_controller(cfg)
    replica_ctrl = model_controller(cfg.case_study, genome,
                                    world_cfg.sensor_state_count,
                                    cfg.model_hidden)
    genuine: list[np.ndarray] = []
    counterfeit: list[np.ndarray] = []

    def samples_from(trial_cfg, seed, out_agents, out_replicas):
        world = initialize_world(trial_cfg, seed)
        traj, _ = run_trial(world, trial_cfg, agent_ctrl, replica_ctrl)
        for b in range(world.n_bodies):
            kind = int(world.kinds[b])
            if kind == BodyKind.OBJECT:
                continue
            speeds = extract_speeds(traj[:, b, :], trial_cfg.control_dt)
            if kind == BodyKind.AGENT:
                out_agents.append(speeds)
            else:
                out_replicas.append(speeds)

    if cfg.replica_mode == "mixed":
        seed = derive_seed(cfg.seed, "trial", generation, model_index)
        samples_from(world_cfg, seed, genuine, counterfeit)
    else:
        group = world_cfg.n_robots
        agents_cfg = replace(world_cfg, n_agents=group, n_replicas=0)
        replicas_cfg = replace(world_cfg, n_agents=0, n_replicas=group)
        samples_from(agents_cfg,
                     derive_seed(cfg.seed, "trial", generation, model_index, "agents"),
                     genuine, counterfeit)
        samples_from(replicas_cfg,
                     derive_seed(cfg.seed, "trial", generation, model_index, "replicas"),
                     genuine, counterfeit)
    return genuine, counterfeit


@dataclass
class GenerationRecord:
    """Full bookkeeping of one generation's judgments and fitnesses."""

    generation: int
    model_fitness: np.ndarray       # (M,) share of judgments fooled
    classifier_fitness: np.ndarray  # (N,)
    specificity: np.ndarray         # (N,)
    sensitivity: np.ndarray         # (N,)
    agent_correct: np.ndarray       # (N, K) bool: genuine judged agent
    counterfeit_fooled: np.ndarray  # (N, C) bool: counterfeit judged agent
    counterfeit_owner: np.ndarray   # (C,) model index of each counterfeit sample
    best_model_index: int
    best_model_genome: np.ndarray

    @property
    def n_classifiers(self) -> int:
        return self.agent_correct.shape[0]

    @property
    def n_models(self) -> int:
        return len(self.model_fitness)

    def verify(self) -> None:
        """Assert the fitness algebra that Eqs. of the engine must satisfy."""
        n, c = self.counterfeit_fooled.shape
        k = self.agent_correct.shape[1]
        reps = c // self.n_models
        assert reps * self.n_models == c
        for arr in (self.model_fitness, self.classifier_fitness,
                    self.specificity, self.sensitivity):
            assert np.all(arr >= 0.0) and np.all(arr <= 1.0)
        # Classifier fitness decomposes exactly.
        recomputed = 0.5 * (self.specificity + self.sensitivity)
        assert np.array_equal(recomputed, self.classifier_fitness)
        # Per-classifier and per-model scores are single divisions of counts.
        for i in range(n):
            assert self.specificity[i] == self.agent_correct[i].sum() / k
            assert self.sensitivity[i] == (c - self.counterfeit_fooled[i].sum()) / c
        fooled_total = 0
        for j in range(self.n_models):
            cols = self.counterfeit_owner == j
            count = int(self.counterfeit_fooled[:, cols].sum())
            fooled_total += count
            assert self.model_fitness[j] == count / (n * reps)
        # Mean model fitness and mean sensitivity are complementary; exact in
        # rational arithmetic (both sides reduce to the same judgment count).
        total = int(self.counterfeit_fooled.sum())
        assert fooled_total == total
        assert Fraction(total, n * c) == 1 - Fraction(n * c - total, n * c)


def fitness_from_judgments(agent_correct: np.ndarray, fooled: np.ndarray,
                           owner: np.ndarray, n_models: int):
    """Fitness arithmetic from raw judgment booleans.

    agent_correct: (N, K) genuine samples judged agent; fooled: (N, C)
    counterfeit samples judged agent; owner: model index per counterfeit
    sample. Returns (model_fitness, specificity, sensitivity,
    classifier_fitness), each a single division of integer counts.
    """
    n = agent_correct.shape[0]
    k = agent_correct.shape[1]
    c = fooled.shape[1]
    reps = c // n_models
    specificity = np.array([int(agent_correct[i].sum()) / k for i in range(n)])
    sensitivity = np.array([(c - int(fooled[i].sum())) / c for i in range(n)])
    classifier_fitness = 0.5 * (specificity + sensitivity)
    model_fitness = np.array([
        int(fooled[:, owner == j].sum()) / (n * reps) for j in range(n_models)])
    return model_fitness, specificity, sensitivity, classifier_fitness


def evaluate_generation(models: Population, classifiers: Population,
                        cfg: ExperimentConfig, generation: int,
                        workers: int = 1) -> GenerationRecord:
    """Run all trials, judge all samples, assign fitness to both populations."""
    genomes = [m.genome for m in models.members]
    n_models = len(genomes)
    results = parallel_map(
        lambda j: run_model_trial(cfg, generation, j, genomes[j]),
        range(n_models), workers)

    genuine_rows = []
    counterfeit_rows = []
    owners = []
    for j, (gen_samples, fake_samples) in enumerate(results):
        genuine_rows.extend(gen_samples)
        counterfeit_rows.extend(fake_samples)
        owners.extend([j] * len(fake_samples))
    genuine = np.ascontiguousarray(np.stack(genuine_rows))
    counterfeit = np.ascontiguousarray(np.stack(counterfeit_rows))
    owner = np.array(owners, dtype=np.int64)
    if cfg.scale_classifier_inputs:
        w = cfg.world
        genuine = scale_pairs(genuine, w.max_speed, w.max_turn_rate)
        counterfeit = scale_pairs(counterfeit, w.max_speed, w.max_turn_rate)

    nets = [classifier_net(m.genome) for m in classifiers.members]

    def judge_all(i: int):
        out_genuine = final_outputs(nets[i], genuine)
        out_fake = final_outputs(nets[i], counterfeit)
        return out_genuine >= 0.5, out_fake >= 0.5

    judged = parallel_map(judge_all, range(len(nets)), workers)
    agent_correct = np.array([g for g, _ in judged])
    fooled = np.array([f for _, f in judged])

    model_fitness, specificity, sensitivity, classifier_fitness = \
        fitness_from_judgments(agent_correct, fooled, owner, n_models)

    for j, member in enumerate(models.members):
        member.fitness = float(model_fitness[j])
    for i, member in enumerate(classifiers.members):
        member.fitness = float(classifier_fitness[i])

    best = int(np.argmax(model_fitness))
    record = GenerationRecord(
        generation=generation,
        model_fitness=model_fitness,
        classifier_fitness=classifier_fitness,
        specificity=specificity,
        sensitivity=sensitivity,
        agent_correct=agent_correct,
        counterfeit_fooled=fooled,
        counterfeit_owner=owner,
        best_model_index=best,
        best_model_genome=models.members[best].genome.copy(),
    )
    record.verify()
    return record


def run_coevolution(cfg: ExperimentConfig, out: RunWriter | None = None,
                    workers: int | None = None,
                    models: Population | None = None,
                    classifiers: Population | None = None,
                    start_generation: int = 0,
                    end_generation: int | None = None) -> RunResult:
    """Full identification run; returns resume-state and evaluated populations.

    RunResult.models/.classifiers hold the post-variation populations (the
    state a resumed run continues from). The populations of the last
    evaluated generation, fitnesses included, are in .evaluated_models /
    .evaluated_classifiers (attached attributes).
    """
    cfg.validate()
    n_workers = resolve_workers(workers)
    if models is None:
        models = init_population(cfg.models.mu, cfg.models.lam,
                                 cfg.model_genome_length(),
                                 derive_rng(cfg.seed, "init", "models"),
                                 cfg.sigma_init)
    if classifiers is None:
        classifiers = init_population(cfg.classifiers.mu, cfg.classifiers.lam,
                                      CLASSIFIER_GENOME_LENGTH,
                                      derive_rng(cfg.seed, "init", "classifiers"),
                                      cfg.sigma_init)
    end = cfg.generations if end_generation is None else end_generation
    summaries: list[GenSummary] = []
    evaluated_models = models
    evaluated_classifiers = classifiers

    for gen in range(start_generation, end):
        if out is not None and gen > 0 and gen % cfg.snapshot_every == 0:
            out.snapshot(gen, models, classifiers)
        record = evaluate_generation(models, classifiers, cfg, gen, n_workers)
        summary = GenSummary(gen, float(np.max(record.model_fitness)),
                             float(np.max(record.classifier_fitness)),
                             tuple(float(v) for v in record.best_model_genome))
        summaries.append(summary)
        if out is not None:
            out.append(summary)
        evaluated_models = models
        evaluated_classifiers = classifiers
        models = es_step(models, derive_rng(cfg.seed, "es", "models", gen),
                         cfg.sigma_floor)
        classifiers = es_step(classifiers,
                              derive_rng(cfg.seed, "es", "classifiers", gen),
                              cfg.sigma_floor)

    result = RunResult(cfg, summaries, models, classifiers)
    result.evaluated_models = evaluated_models  # type: ignore[attr-defined]
    result.evaluated_classifiers = evaluated_classifiers  # type: ignore[attr-defined]
    return result


def best_evaluated(pop: Population):
    """Member with the highest fitness (ties to the lower index)."""
    return pop.members[ranked_indices(pop)[0]]
