import os
from fractions import Fraction

import numpy as np
import pytest

from swarmident.config import ExperimentConfig, PopulationConfig, WorldConfig
from swarmident.coevolution import (best_evaluated, evaluate_generation,
                                    fitness_from_judgments, run_coevolution,
                                    run_model_trial)
from swarmident.evolution import init_population
from swarmident.rng import derive_rng


def test_fitness_from_hand_built_judgment_matrix():
    # Classifier A misjudges model 0 only; classifier B misjudges both.
    fooled = np.array([[True, False],
                       [True, True]])
    owner = np.array([0, 1])
    agent_correct = np.array([[True, True, False],
                              [True, True, True]])
    r_m, spec, sens, r_c = fitness_from_judgments(agent_correct, fooled,
                                                  owner, 2)
    assert np.array_equal(r_m, [1.0, 0.5])
    assert np.array_equal(sens, [0.5, 0.0])
    assert np.array_equal(spec, [2 / 3, 1.0])
    assert np.array_equal(r_c, [(2 / 3 + 0.5) / 2, 0.5])


def test_always_agent_classifier_scores_half():
    fooled = np.ones((1, 4), dtype=bool)       # every counterfeit accepted
    agent_correct = np.ones((1, 10), dtype=bool)
    r_m, spec, sens, r_c = fitness_from_judgments(agent_correct, fooled,
                                                  np.arange(4), 4)
    assert spec[0] == 1.0 and sens[0] == 0.0 and r_c[0] == 0.5
    assert np.all(r_m == 1.0)


def test_model_fooling_30_of_100_classifiers():
    fooled = np.zeros((100, 1), dtype=bool)
    fooled[:30, 0] = True
    agent_correct = np.ones((100, 5), dtype=bool)
    r_m, _, _, _ = fitness_from_judgments(agent_correct, fooled,
                                          np.array([0]), 1)
    assert r_m[0] == 0.3


def test_mean_identity_exact_in_rational_arithmetic(rng):
    for _ in range(20):
        n, m = int(rng.integers(2, 8)), int(rng.integers(2, 8))
        fooled = rng.random((n, m)) < 0.5
        agent_correct = rng.random((n, 3 * m)) < 0.5
        owner = np.arange(m)
        r_m, _, sens, _ = fitness_from_judgments(agent_correct, fooled,
                                                 owner, m)
        total = int(fooled.sum())
        assert Fraction(total, n * m) == 1 - Fraction(n * m - total, n * m)
        # float vectors agree with their integer counts
        for j in range(m):
            assert r_m[j] == int(fooled[:, j].sum()) / n
        for i in range(n):
            assert sens[i] == (m - int(fooled[i].sum())) / m


def small_cfg(tmp_path, **kw):
    defaults = dict(
        case_study="aggregation", engine="adversarial", generations=2,
        seed=99, snapshot_every=1, output_dir=str(tmp_path / "out"),
        world=WorldConfig(n_agents=3, n_replicas=1, init_square_side=190.0,
                          trial_duration=3.0, sensor_state_count=2),
        models=PopulationConfig(2, 2), classifiers=PopulationConfig(2, 2))
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def test_mixed_trial_sample_layout(tmp_path):
    cfg = small_cfg(tmp_path)
    genuine, counterfeit = run_model_trial(cfg, 0, 0, np.zeros(4))
    assert len(genuine) == 3 and len(counterfeit) == 1
    assert genuine[0].shape == (cfg.world.control_steps, 2)


def test_separated_trial_sample_layout(tmp_path):
    cfg = small_cfg(tmp_path, replica_mode="separated")
    genuine, counterfeit = run_model_trial(cfg, 0, 0, np.zeros(4))
    assert len(genuine) == 4 and len(counterfeit) == 4


def test_evaluate_generation_record_invariants(tmp_path):
    cfg = small_cfg(tmp_path)
    models = init_population(2, 2, 4, derive_rng(1, "m"))
    classifiers = init_population(2, 2, 46, derive_rng(1, "c"))
    rec = evaluate_generation(models, classifiers, cfg, 0)
    rec.verify()
    assert rec.agent_correct.shape == (4, 4 * 3)
    assert rec.counterfeit_fooled.shape == (4, 4)
    assert all(m.fitness is not None for m in models.members)
    assert all(c.fitness is not None for c in classifiers.members)
    assert rec.best_model_index == int(np.argmax(rec.model_fitness))


def test_smoke_run_produces_records(tmp_path):
    cfg = small_cfg(tmp_path)
    result = run_coevolution(cfg)
    assert len(result.summaries) == 2
    for s in result.summaries:
        assert 0.0 <= s.best_rm <= 1.0
        assert 0.0 <= s.best_rc <= 1.0
        assert len(s.best_params) == 4
    best = best_evaluated(result.evaluated_models)
    assert best.fitness == result.summaries[-1].best_rm


def test_run_determinism_across_worker_counts(tmp_path):
    rows = []
    for workers in (1, 2, 8):
        cfg = small_cfg(tmp_path, generations=3)
        result = run_coevolution(cfg, workers=workers)
        rows.append([(s.generation, s.best_rm, s.best_rc, s.best_params)
                     for s in result.summaries])
    assert rows[0] == rows[1] == rows[2]


def test_separated_run_smoke(tmp_path):
    cfg = small_cfg(tmp_path, replica_mode="separated")
    result = run_coevolution(cfg)
    assert len(result.summaries) == 2
