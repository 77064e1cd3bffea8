"""Self-adaptive (mu+lambda) evolution strategy shared by both engines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SIGMA_FLOOR = 1e-6


@dataclass
class Individual:
    genome: np.ndarray
    sigmas: np.ndarray
    fitness: float | None = None

    def __post_init__(self):
        self.genome = np.asarray(self.genome, dtype=np.float64)
        self.sigmas = np.asarray(self.sigmas, dtype=np.float64)
        if self.genome.shape != self.sigmas.shape:
            raise ValueError("genome and sigmas must have equal length")

    def copy(self) -> "Individual":
        return Individual(self.genome.copy(), self.sigmas.copy(), self.fitness)


@dataclass
class Population:
    members: list[Individual]
    mu: int
    lam: int

    @property
    def genome_length(self) -> int:
        return len(self.members[0].genome)

    def genomes(self) -> np.ndarray:
        return np.array([m.genome for m in self.members])

    def fitnesses(self) -> np.ndarray:
        return np.array([math.nan if m.fitness is None else m.fitness
                         for m in self.members])


def init_population(mu: int, lam: int, genome_length: int,
                    rng: np.random.Generator,
                    sigma_init: float = 1.0) -> Population:
    """mu+lambda individuals with standard-normal genomes and unit sigmas."""
    members = [Individual(rng.standard_normal(genome_length),
                          np.full(genome_length, sigma_init))
               for _ in range(mu + lam)]
    return Population(members, mu, lam)


def ranked_indices(pop: Population) -> list[int]:
    """Indices by descending fitness; ties broken by lower index."""
    for i, m in enumerate(pop.members):
        if m.fitness is None:
            raise ValueError(f"individual {i} has no fitness")
    return sorted(range(len(pop.members)),
                  key=lambda i: (-pop.members[i].fitness, i))


def es_step(pop: Population, rng: np.random.Generator,
            sigma_floor: float = SIGMA_FLOOR) -> Population:
    """One selection + variation step.

    The best mu individuals survive unchanged; each of the lam offspring
    picks a parent uniformly among the survivors and mutates with
    log-normal self-adaptation of the per-gene step sizes (no recombination).
    """
    order = ranked_indices(pop)
    survivors = [pop.members[i].copy() for i in order[:pop.mu]]
    length = pop.genome_length
    tau_global = 1.0 / math.sqrt(2.0 * length)
    tau_local = 1.0 / math.sqrt(2.0 * math.sqrt(length))

    offspring = []
    for _ in range(pop.lam):
        parent = survivors[int(rng.integers(0, pop.mu))]
        global_draw = rng.standard_normal()
        sigmas = parent.sigmas * np.exp(tau_global * global_draw
                                        + tau_local * rng.standard_normal(length))
        np.maximum(sigmas, sigma_floor, out=sigmas)
        genome = parent.genome + sigmas * rng.standard_normal(length)
        offspring.append(Individual(genome, sigmas))
    return Population(survivors + offspring, pop.mu, pop.lam)
