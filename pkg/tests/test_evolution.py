import numpy as np
import pytest

from swarmident.evolution import (Individual, Population, es_step,
                                  init_population, ranked_indices)
from swarmident.rng import derive_rng


def make_pop(fitnesses, mu=2, lam=2, length=3):
    members = [Individual(np.full(length, float(i)), np.ones(length), f)
               for i, f in enumerate(fitnesses)]
    return Population(members, mu, lam)


def test_init_population_shapes_and_distribution():
    pop = init_population(50, 50, 4, derive_rng(1, "init"))
    assert len(pop.members) == 100
    genomes = pop.genomes()
    assert genomes.shape == (100, 4)
    assert abs(genomes.mean()) < 0.2
    assert 0.8 < genomes.std() < 1.2
    assert all(np.all(m.sigmas == 1.0) for m in pop.members)


def test_ranking_descending_with_index_ties():
    pop = make_pop([0.5, 0.9, 0.5, 0.1])
    assert ranked_indices(pop) == [1, 0, 2, 3]


def test_ranking_requires_fitness():
    pop = make_pop([0.5, None, 0.2, 0.1])
    with pytest.raises(ValueError):
        ranked_indices(pop)


def test_identical_population_offspring_differ():
    members = [Individual(np.zeros(4), np.ones(4), 1.0) for _ in range(4)]
    pop = Population(members, 2, 2)
    out = es_step(pop, derive_rng(7, "es"))
    survivors, offspring = out.members[:2], out.members[2:]
    for s in survivors:
        assert np.array_equal(s.genome, np.zeros(4))
        assert s.fitness == 1.0
    for child in offspring:
        assert not np.array_equal(child.genome, np.zeros(4))
        assert child.fitness is None


def test_elitist_selection_is_monotone():
    pop = make_pop([0.1, 0.9, 0.4, 0.7])
    before = max(m.fitness for m in pop.members)
    out = es_step(pop, derive_rng(8, "es"))
    survivor_best = max(m.fitness for m in out.members[:2])
    assert survivor_best >= before


def test_survivors_are_copies():
    pop = make_pop([1.0, 0.5, 0.2, 0.1])
    out = es_step(pop, derive_rng(9, "es"))
    out.members[0].genome[0] = 99.0
    assert pop.members[0].genome[0] == 0.0


def test_sigma_floor_holds_under_adversarial_shrinkage():
    members = [Individual(np.zeros(2), np.full(2, 1e-6), 1.0)
               for _ in range(4)]
    pop = Population(members, 2, 2)
    rng = derive_rng(10, "es")
    for _ in range(500):
        for m in pop.members:
            m.fitness = 1.0
        pop = es_step(pop, rng, sigma_floor=1e-6)
        for m in pop.members:
            assert np.all(m.sigmas >= 1e-6)


def test_es_step_deterministic():
    pop = make_pop([0.3, 0.6, 0.8, 0.2], length=5)
    a = es_step(pop, derive_rng(11, "es"))
    b = es_step(pop, derive_rng(11, "es"))
    for ma, mb in zip(a.members, b.members):
        assert np.array_equal(ma.genome, mb.genome)
        assert np.array_equal(ma.sigmas, mb.sigmas)


def test_population_size_invariant():
    pop = init_population(3, 5, 2, derive_rng(12, "init"))
    assert len(pop.members) == 8
    for m in pop.members:
        m.fitness = 0.0
    out = es_step(pop, derive_rng(13, "es"))
    assert len(out.members) == 8
    assert out.mu == 3 and out.lam == 5
