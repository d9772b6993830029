"""(mu + lambda) genetic algorithm over permutation chromosomes."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .decoder import FitnessFunction, GroomingSolution, SplitMode, decode
from .grooming import DEFAULT_MAX_PARTS
from .topology import TreeTopology
from .traffic import TrafficInstance

__all__ = [
    "Fitness",
    "GaParams",
    "GenerationRecord",
    "EvolutionResult",
    "ox_crossover",
    "inversion_mutation",
    "compare_fitness",
    "evolve",
]

log = logging.getLogger(__name__)


class Fitness(NamedTuple):
    """Lexicographic cost: fewer ADMs first, then fewer wavelengths. Smaller is better."""

    adms: int
    wavelengths: int


def compare_fitness(a, b) -> int:
    """-1 if ``a`` is better than ``b``, 1 if worse, 0 if equal."""
    a, b = tuple(a), tuple(b)
    return (a > b) - (a < b)


@dataclass(frozen=True)
class GaParams:
    mu: int = 200
    lambda_offspring: int = 200
    pc: float = 0.6
    pm: float = 0.4
    generations: int = 500
    seed: int = 0
    mode: SplitMode = SplitMode.NONE
    max_parts: int = DEFAULT_MAX_PARTS

    def __post_init__(self):
        object.__setattr__(self, "mode", SplitMode.parse(self.mode))
        if self.mu < 1 or self.lambda_offspring < 1:
            raise ValueError("mu and lambda must be at least 1")
        if not (0 <= self.pc <= 1 and 0 <= self.pm <= 1):
            raise ValueError("pc and pm must lie in [0, 1]")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")

    @classmethod
    def paper_scale(cls, **kw) -> "GaParams":
        return cls(**kw)

    @classmethod
    def desk_scale(cls, **kw) -> "GaParams":
        kw = {"mu": 50, "lambda_offspring": 50, "generations": 100, **kw}
        return cls(**kw)


# crossover --------------------------------------------------------------------

def ox_crossover(parent_a, parent_b, cut1: int, cut2: int) -> np.ndarray:
    """Two-point order crossover.

    The child keeps ``parent_a[cut1:cut2]`` in place; the other positions are
    filled left to right with the remaining genes in ``parent_b`` order.

    >>> ox_crossover([1, 2, 3, 4, 5], [5, 4, 3, 2, 1], 1, 3).tolist()
    [5, 2, 3, 4, 1]
    """
    a = np.asarray(parent_a)
    b = np.asarray(parent_b)
    if a.shape != b.shape or not np.array_equal(np.sort(a), np.sort(b)):
        raise ValueError("parents are not permutations of the same genes")
    if not 0 <= cut1 < cut2 <= a.size:
        raise ValueError(f"invalid cut points ({cut1}, {cut2}) for length {a.size}")
    kept = a[cut1:cut2]
    rest = b[~np.isin(b, kept)]
    return np.concatenate([rest[:cut1], kept, rest[cut1:]])


def inversion_mutation(chromosome, p1: int, p2: int) -> np.ndarray:
    """Reverse the genes in ``[p1, p2)``."""
    c = np.array(chromosome)
    if not 0 <= p1 < p2 <= c.size:
        raise ValueError(f"invalid inversion points ({p1}, {p2}) for length {c.size}")
    c[p1:p2] = c[p1:p2][::-1]
    return c


def _two_points(rng: np.random.Generator, size: int) -> tuple[int, int]:
    # ordered pair 0 <= p < q <= size
    p, q = sorted(rng.choice(size + 1, size=2, replace=False))
    return int(p), int(q)


# the GA ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_adms: int
    best_wavelengths: int
    evals: int


@dataclass
class EvolutionResult:
    best: GroomingSolution
    best_fitness: Fitness
    history: list[GenerationRecord]
    population: list[tuple[Fitness, np.ndarray]] = field(repr=False)
    evals: int = 0
    wall_time: float = 0.0


class _Individual(NamedTuple):
    fitness: Fitness
    is_offspring: int
    created: int
    genes: np.ndarray

    @property
    def key(self):
        return (self.fitness, self.is_offspring, self.created)


def _initial_population(rng, N: int, mu: int) -> list[np.ndarray]:
    if N < 21 and math.factorial(N) < mu:
        log.warning("only %d distinct permutations exist; reducing mu from %d", math.factorial(N), mu)
        mu = math.factorial(N)
    pop, seen = [], set()
    while len(pop) < mu:
        p = rng.permutation(N)
        key = p.tobytes()
        if key not in seen:
            seen.add(key)
            pop.append(p)
    return pop


def evolve(instance: TrafficInstance, topology: TreeTopology, params: GaParams | None = None,
           callback: Callable[[GenerationRecord], None] | None = None) -> EvolutionResult:
    """Run the (mu + lambda) GA and return the best decoded solution.

    Offspring: two distinct parents drawn uniformly; order crossover with
    probability ``pc`` (otherwise a copy of the first parent); then inversion
    with probability ``pm``. The mu best of parents + offspring survive;
    exact ties favour parents, then earlier creation.
    """
    params = params or GaParams()
    t0 = time.perf_counter()
    rng = np.random.default_rng(params.seed)
    N = instance.N
    fitness_fn = FitnessFunction(instance, topology, params.mode, params.max_parts)
    cache: dict[bytes, Fitness] = {}

    def evaluate(genes: np.ndarray) -> Fitness:
        key = genes.tobytes()
        fit = cache.get(key)
        if fit is None:
            fit = Fitness(*fitness_fn(genes))
            cache[key] = fit
        return fit

    created = 0
    population = []
    for genes in _initial_population(rng, N, params.mu):
        population.append(_Individual(evaluate(genes), 0, created, genes))
        created += 1
    mu = len(population)
    population.sort(key=lambda ind: ind.key)

    history = [GenerationRecord(0, *population[0].fitness, len(cache))]
    if callback:
        callback(history[-1])

    for gen in range(1, params.generations + 1):
        offspring = []
        for _ in range(params.lambda_offspring):
            if mu > 1:
                i, j = rng.choice(mu, size=2, replace=False)
            else:
                i = j = 0
            child = population[i].genes
            if rng.random() < params.pc and N > 1:
                c1, c2 = _two_points(rng, N)
                child = ox_crossover(child, population[j].genes, c1, c2)
            if rng.random() < params.pm and N > 1:
                p1, p2 = _two_points(rng, N)
                child = inversion_mutation(child, p1, p2)
            offspring.append(child)
        scored = [_Individual(evaluate(c), 1, created + t, c) for t, c in enumerate(offspring)]
        created += len(offspring)
        population = sorted(population + scored, key=lambda ind: ind.key)[:mu]
        population = [ind._replace(is_offspring=0) for ind in population]
        history.append(GenerationRecord(gen, *population[0].fitness, len(cache)))
        if callback:
            callback(history[-1])

    best = population[0]
    solution = decode(best.genes, instance, topology, params.mode, params.max_parts)
    if solution.fitness != tuple(best.fitness):
        raise RuntimeError("decoded best individual disagrees with its cached fitness")
    return EvolutionResult(
        best=solution,
        best_fitness=best.fitness,
        history=history,
        population=[(ind.fitness, ind.genes) for ind in population],
        evals=len(cache),
        wall_time=time.perf_counter() - t0,
    )
