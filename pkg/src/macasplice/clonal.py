"""Clonal-selection trainer for basin-vote chromosomes.

One training run evolves a population of CA rules to maximize fitness,
defined as the exact fraction of the training set a rule's own fitted
basin map classifies correctly.  Each generation: the top ranks are cloned
in rank-proportional numbers, clones are hypermutated at a rate that
decays with parent fitness, and the next population keeps the best
distinct rules plus a handful of fresh random ones.  The single best rule
is never displaced, and a run stops early as soon as any rule reaches
fitness 1.

Determinism: every random draw comes from a stream seeded by
(master seed, generation, member index), so results are bit-identical for
a fixed config regardless of evaluation order or backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .classifier import FmacaChromosome, fit_chromosome, training_fitness
from .fca import ComplementVector, DependencyMatrix, EvolutionParams

__all__ = [
    "TrainerConfig",
    "Member",
    "Population",
    "TrainingState",
    "init_population",
    "mutation_rate",
    "hypermutate",
    "evolve_generation",
    "train",
]

# non-empty dependency-set masks available to edge cells (bit 0 = left
# neighbor, bit 1 = self, bit 2 = right neighbor)
_FIRST_CELL_MASKS = np.array([2, 4, 6], dtype=np.uint8)
_LAST_CELL_MASKS = np.array([1, 2, 3], dtype=np.uint8)


def _as_fraction(value) -> Fraction:
    # floats convert by their decimal literal (0.2 -> 1/5), keeping the
    # selection and cloning arithmetic exact
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class TrainerConfig:
    population_size: int = 500
    g_max: int = 100
    selection_fraction: Fraction = Fraction(1, 5)
    clone_factor: Fraction = Fraction(1)
    p_max: Fraction = Fraction(1, 10)
    decay: Fraction = Fraction(5)
    replacement_count: int | None = None  # None: 5% of the population
    seed: int = 0

    def __post_init__(self):
        for name in ("selection_fraction", "clone_factor", "p_max", "decay"):
            object.__setattr__(self, name, _as_fraction(getattr(self, name)))
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.g_max < 0:
            raise ValueError("g_max must be >= 0")
        if not 0 < self.selection_fraction <= 1:
            raise ValueError("selection_fraction must be in (0, 1]")
        if self.clone_factor < 0:
            raise ValueError("clone_factor must be >= 0")
        if not 0 <= self.p_max <= 1:
            raise ValueError("p_max must be in [0, 1]")
        if self.decay < 0:
            raise ValueError("decay must be >= 0")
        if not 0 <= self.replacements < self.population_size:
            raise ValueError("replacement_count must be in [0, population_size)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def replacements(self) -> int:
        if self.replacement_count is None:
            return round(Fraction(5, 100) * self.population_size)
        return self.replacement_count

    @property
    def selection_count(self) -> int:
        return math.ceil(self.selection_fraction * self.population_size)


@dataclass(frozen=True)
class Member:
    """An evaluated population slot: a bare rule plus its fitness."""

    rule: FmacaChromosome
    fitness: Fraction


@dataclass(frozen=True)
class Population:
    """Evaluated members, sorted descending by fitness."""

    members: tuple[Member, ...]

    def __post_init__(self):
        ffs = [m.fitness for m in self.members]
        if any(a < b for a, b in zip(ffs, ffs[1:])):
            raise ValueError("population members must be sorted descending by fitness")

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def best(self) -> Member:
        return self.members[0]

    def mean_fitness(self) -> Fraction:
        return sum((m.fitness for m in self.members), Fraction(0)) / len(self.members)


@dataclass(frozen=True)
class TrainingState:
    """Where a run ended: generation counter, best rule, fitness history."""

    gc: int
    best: FmacaChromosome
    history: tuple[tuple[Fraction, Fraction], ...]  # (best, mean) per evaluation


def _stream(seed: int, generation: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, generation, index)))


def _random_rule(rng: np.random.Generator, length: int) -> FmacaChromosome:
    """Rule with each row uniform over the non-empty subsets of its
    neighborhood and fair-coin complement bits."""
    masks = rng.integers(1, 8, size=length).astype(np.uint8)
    if length == 1:
        masks[0] = 2  # the only non-empty subset of a lone cell
    else:
        masks[0] = _FIRST_CELL_MASKS[rng.integers(3)]
        masks[-1] = _LAST_CELL_MASKS[rng.integers(3)]
    flips = rng.integers(0, 2, size=length).astype(np.uint8)
    return FmacaChromosome(DependencyMatrix(masks), ComplementVector(flips))


def init_population(length: int, config: TrainerConfig) -> list[FmacaChromosome]:
    """Generate the (unevaluated) initial rules, one RNG stream each."""
    if length < 1:
        raise ValueError("need at least one cell")
    return [
        _random_rule(_stream(config.seed, 0, i), length)
        for i in range(config.population_size)
    ]


def mutation_rate(ff: Fraction, config: TrainerConfig) -> float:
    """Hypermutation bit-flip probability for a parent of fitness ``ff``:
    p_max * exp(-decay * ff), so better parents mutate less."""
    return float(config.p_max) * math.exp(-float(config.decay) * float(ff))


def hypermutate(
    rule: FmacaChromosome, rate: float, rng: np.random.Generator
) -> FmacaChromosome:
    """Flip each dependency bit and complement bit independently.

    Bits that would reach outside the array are never set; a row mutated to
    the empty set is repaired by re-adding the self-dependency.  Always
    draws the same number of variates, so streams stay aligned for any
    rate.
    """
    length = rule.length
    t_draws = rng.random((length, 3))
    f_draws = rng.random(length)
    masks = rule.T.masks.copy()
    for i in range(length):
        allowed = 2
        if i > 0:
            allowed |= 1
        if i < length - 1:
            allowed |= 4
        flip = 0
        for b in range(3):
            if t_draws[i, b] < rate and allowed & (1 << b):
                flip |= 1 << b
        masks[i] ^= flip
        if masks[i] == 0:
            masks[i] = 2  # repair: re-add the self-dependency
    flips = np.where(f_draws < rate, rule.F.bits ^ 1, rule.F.bits).astype(np.uint8)
    return FmacaChromosome(DependencyMatrix(masks), ComplementVector(flips))


class _Evaluator:
    """Caches fitness by rule bytes; sound because fitness is a pure
    function of the rule for a fixed training set."""

    def __init__(self, configs, positive_mask, params: EvolutionParams):
        self.configs = configs
        self.positive_mask = positive_mask
        self.params = params
        self.cache: dict[bytes, Fraction] = {}

    def member(self, rule: FmacaChromosome) -> Member:
        key = rule.rule_bytes()
        ff = self.cache.get(key)
        if ff is None:
            ff = training_fitness(rule.T, rule.F, self.configs, self.positive_mask, self.params)
            self.cache[key] = ff
        return Member(rule, ff)


def _sorted_members(members) -> tuple[Member, ...]:
    # stable: equal fitness keeps list order (current population before
    # clones, clones in creation order)
    return tuple(sorted(members, key=lambda m: m.fitness, reverse=True))


def clone_count(config: TrainerConfig, rank: int) -> int:
    """Clones granted to the parent of 1-based ``rank``; never zero."""
    return max(1, round(config.clone_factor * config.population_size / rank))


def _next_population(
    population: Population,
    config: TrainerConfig,
    generation: int,
    evaluator: _Evaluator,
) -> Population:
    clones: list[Member] = []
    stream_index = 0
    for rank in range(1, config.selection_count + 1):
        parent = population.members[rank - 1]
        rate = mutation_rate(parent.fitness, config)
        for _ in range(clone_count(config, rank)):
            rng = _stream(config.seed, generation, stream_index)
            stream_index += 1
            clones.append(evaluator.member(hypermutate(parent.rule, rate, rng)))

    pool = _sorted_members(list(population.members) + clones)
    survivor_quota = config.population_size - config.replacements
    survivors: list[Member] = []
    leftovers: list[Member] = []
    seen: set[bytes] = set()
    for member in pool:
        if len(survivors) == survivor_quota:
            break
        key = member.rule.rule_bytes()
        if key in seen:
            leftovers.append(member)
        else:
            seen.add(key)
            survivors.append(member)
    # short of distinct rules: refill with duplicates in pool order
    survivors.extend(leftovers[: survivor_quota - len(survivors)])

    fresh = []
    length = population.best.rule.length
    for _ in range(config.replacements):
        rng = _stream(config.seed, generation, stream_index)
        stream_index += 1
        fresh.append(evaluator.member(_random_rule(rng, length)))

    return Population(_sorted_members(survivors + fresh))


def evolve_generation(
    population: Population,
    configs,
    positive_mask,
    config: TrainerConfig,
    generation: int,
    params: EvolutionParams | None = None,
) -> Population:
    """One generation: select, clone, hypermutate, evaluate, replace.

    ``generation`` (1-based) seeds the RNG streams of this generation's
    clones and fresh rules.  The best member always survives.
    """
    if population.size != config.population_size:
        raise ValueError("population size does not match config")
    evaluator = _Evaluator(
        np.ascontiguousarray(configs, dtype=np.float64),
        np.asarray(positive_mask, dtype=bool),
        params or EvolutionParams(),
    )
    return _next_population(population, config, generation, evaluator)


def train(
    configs,
    positive_mask,
    config: TrainerConfig | None = None,
    params: EvolutionParams | None = None,
) -> tuple[FmacaChromosome, TrainingState]:
    """Full training run; returns the fitted best chromosome and the state.

    Stops as soon as any rule reaches fitness 1, or after g_max
    generations.  History holds one (best, mean) fitness pair per
    evaluated population, the initial one included.
    """
    config = config or TrainerConfig()
    params = params or EvolutionParams()
    configs = np.ascontiguousarray(configs, dtype=np.float64)
    positive_mask = np.asarray(positive_mask, dtype=bool)
    if configs.ndim != 2 or configs.shape[0] == 0:
        raise ValueError("training set must be non-empty and 2-d")
    if len(positive_mask) != configs.shape[0]:
        raise ValueError("one positive/negative flag per training configuration required")

    evaluator = _Evaluator(configs, positive_mask, params)
    population = Population(
        _sorted_members(
            evaluator.member(rule)
            for rule in init_population(configs.shape[1], config)
        )
    )
    history = [(population.best.fitness, population.mean_fitness())]
    best_ever = population.best
    gc = 0
    if population.best.fitness < 1:
        for generation in range(1, config.g_max + 1):
            gc = generation
            population = _next_population(population, config, generation, evaluator)
            history.append((population.best.fitness, population.mean_fitness()))
            if population.best.fitness > best_ever.fitness:
                best_ever = population.best
            if population.best.fitness == 1:
                break

    fitted = fit_chromosome(
        best_ever.rule.T, best_ever.rule.F, configs, positive_mask, params
    )
    state = TrainingState(gc, fitted, tuple(history))
    return fitted, state
