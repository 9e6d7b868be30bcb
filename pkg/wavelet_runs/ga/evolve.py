"""Generational GA loop shared by the binary and the real-coded stage."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Callable, Generic, NamedTuple, TypeVar

import numpy as np
from loguru import logger

from ..base import InvalidInputError

if TYPE_CHECKING:
    from collections.abc import Sequence
    from concurrent.futures import Executor

C = TypeVar("C")

# denominator floor for relative changes of a best value at zero
_RELATIVE_FLOOR = 1e-300


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    max_generations: int = 500
    stall_generations: int = 50
    stall_tolerance: float = 1e-6
    # per gene in the binary stage, per chromosome in the real stage
    mutation_rate: float = 0.02
    # real stage only: mutation step as a multiple of the noise level
    mutation_scale: float = 0.5
    elite_count: int = 2
    tournament_size: int = 2
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 4:
            raise InvalidInputError(
                f"population_size must be at least 4, got {self.population_size}"
            )
        if not 0 <= self.elite_count < self.population_size:
            raise InvalidInputError(
                f"elite_count must be in [0, population_size), got {self.elite_count}"
            )
        if self.max_generations < 1 or self.stall_generations < 1:
            raise InvalidInputError("generation limits must be positive")
        if not 0 <= self.mutation_rate <= 1:
            raise InvalidInputError(
                f"mutation_rate must be a probability, got {self.mutation_rate}"
            )
        if self.stall_tolerance < 0 or self.mutation_scale < 0:
            raise InvalidInputError(
                "stall_tolerance and mutation_scale must be nonnegative"
            )
        if self.tournament_size < 1:
            raise InvalidInputError("tournament_size must be positive")

    @classmethod
    def binary_defaults(cls, **kwargs: Any) -> GaConfig:
        return cls(**{"mutation_rate": 0.02, **kwargs})

    @classmethod
    def real_defaults(cls, **kwargs: Any) -> GaConfig:
        # value refinement stays close to the values the support stage scored
        defaults = {
            "mutation_rate": 0.1,
            "mutation_scale": 0.1,
            "max_generations": 10,
            "stall_generations": 5,
        }
        return cls(**{**defaults, **kwargs})

    def with_seed(self, seed: int) -> GaConfig:
        return replace(self, rng_seed=seed)


class Individual(NamedTuple):
    chromosome: Any
    value: float
    # generation of birth, younger individuals win ties on plateaus
    born: int


class Operators(NamedTuple):
    crossover: Callable[[Any, Any, np.random.Generator], Any]
    mutate: Callable[[Any, np.random.Generator], Any]


@dataclass
class GaState(Generic[C]):
    population: list[Individual]
    generation: int = 0
    best_history: list[float] = field(default_factory=list)
    stopped_by: str = ""

    @property
    def best(self) -> Individual:
        return min(self.population, key=_rank)


def _rank(individual: Individual) -> tuple[float, int]:
    return individual.value, -individual.born


def _evaluate(
    objective: Callable[[C], float],
    chromosomes: Sequence[C],
    executor: Executor | None,
) -> list[float]:
    if executor is None:
        return [float(objective(c)) for c in chromosomes]
    # map preserves order, so parallel evaluation gives the same result
    return [float(v) for v in executor.map(objective, chromosomes)]


def _tournament(
    population: Sequence[Individual], size: int, rng: np.random.Generator
) -> Individual:
    picks = rng.integers(len(population), size=size)
    return min((population[i] for i in picks), key=_rank)


def stall_measure(best_history: Sequence[float], window: int) -> float:
    """Average relative change of the best value over the last ``window`` generations."""
    recent = np.asarray(best_history[-(window + 1) :], dtype=np.float64)
    previous = np.maximum(np.abs(recent[:-1]), _RELATIVE_FLOOR)
    return float(np.mean(np.abs(np.diff(recent)) / previous))


def evolve(
    objective: Callable[[C], float],
    init_population: Sequence[C],
    cfg: GaConfig,
    operators: Operators,
    executor: Executor | None = None,
) -> tuple[C, float, GaState[C]]:
    """Minimise ``objective`` with an elitist generational GA.

    Each generation breeds ``population_size`` children from tournament-selected
    parents. The ``elite_count`` best parents survive unconditionally and the
    rest of the next population is the best of the remaining parents and
    children, ties going to the younger individual. The loop stops after
    ``max_generations`` or once the best value's average relative change over
    the last ``stall_generations`` generations is at most ``stall_tolerance``.
    """
    if len(init_population) == 0:
        raise InvalidInputError("initial population is empty")
    if len(init_population) != cfg.population_size:
        raise InvalidInputError(
            f"initial population has {len(init_population)} members, "
            f"expected {cfg.population_size}"
        )

    rng = np.random.default_rng(cfg.rng_seed)
    values = _evaluate(objective, init_population, executor)
    state = GaState(
        [Individual(c, v, 0) for c, v in zip(init_population, values)],
    )
    state.best_history.append(state.best.value)

    while state.generation < cfg.max_generations:
        state.generation += 1
        parents = state.population
        children = [
            operators.mutate(
                operators.crossover(
                    _tournament(parents, cfg.tournament_size, rng).chromosome,
                    _tournament(parents, cfg.tournament_size, rng).chromosome,
                    rng,
                ),
                rng,
            )
            for _ in range(cfg.population_size)
        ]
        child_values = _evaluate(objective, children, executor)

        ranked_parents = sorted(parents, key=_rank)
        elites = ranked_parents[: cfg.elite_count]
        pool = ranked_parents[cfg.elite_count :] + [
            Individual(c, v, state.generation) for c, v in zip(children, child_values)
        ]
        pool.sort(key=_rank)
        state.population = elites + pool[: cfg.population_size - cfg.elite_count]

        best = state.best.value
        assert best <= state.best_history[-1], "best value increased despite elitism"
        state.best_history.append(best)

        if state.generation > cfg.stall_generations:
            measure = stall_measure(state.best_history, cfg.stall_generations)
            logger.debug(
                "generation {}: best {:.6g}, stall measure {:.3g}",
                state.generation,
                best,
                measure,
            )
            if measure <= cfg.stall_tolerance:
                state.stopped_by = "stall"
                break
        else:
            logger.debug("generation {}: best {:.6g}", state.generation, best)
    else:
        state.stopped_by = "max_generations"

    best_individual = state.best
    return best_individual.chromosome, best_individual.value, state
