"""Basin-vote classifiers built on the cellular-automaton core.

A fitted chromosome is a CA rule plus a basin map: every training
configuration is evolved to its attractor, and each basin votes by the
majority class of the training instances that drained into it.
Classification evolves the query configuration and returns its basin's
vote; a basin never seen in training predicts negative with zero
confidence.

Two fitted chromosomes chain into a tree over the three splice classes:
the donor stage separates donor windows from everything else, the acceptor
stage separates acceptor windows from the rest.  A query descends until
some stage claims it; a prediction that consulted both stages scores the
weaker of the two votes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .fca import ComplementVector, DependencyMatrix, EvolutionParams, evolve_batch
from .seqio import WINDOW, ClassLabel, FuzzyEncoder

__all__ = [
    "ClassLabel",
    "BasinVote",
    "StageResult",
    "FmacaChromosome",
    "MacaCcTree",
    "Prediction",
    "fit_basins",
    "fit_chromosome",
    "training_fitness",
    "classify_stage",
    "classify_stage_batch",
    "classify",
    "dichotomy_mask",
    "UNSEEN",
    "VOTED",
]

VOTED = "voted"
UNSEEN = "unseen"

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class BasinVote:
    """Majority verdict of one basin; ties vote negative at confidence 1/2."""

    positive: bool
    confidence: Fraction


class StageResult(NamedTuple):
    positive: bool
    confidence: Fraction
    status: str  # VOTED or UNSEEN


@dataclass(frozen=True)
class Prediction:
    label: ClassLabel
    score: Fraction


def dichotomy_mask(labels: Sequence[ClassLabel], positive: Iterable[ClassLabel]) -> np.ndarray:
    """Boolean mask marking the instances whose label is in ``positive``."""
    pos = set(positive)
    return np.array([lab in pos for lab in labels], dtype=bool)


@dataclass(frozen=True)
class FmacaChromosome:
    """A CA rule, optionally carrying its fitted basin votes and fitness.

    ``basin_map`` and ``fitness`` are set together by fitting; an unfitted
    chromosome is just the rule.  Mapped confidences are majority fractions
    and therefore at least 1/2.
    """

    T: DependencyMatrix
    F: ComplementVector
    basin_map: dict[str, BasinVote] | None = None
    fitness: Fraction | None = None

    def __post_init__(self):
        if self.T.length != self.F.length:
            raise ValueError("dependency matrix and complement vector lengths differ")
        if (self.basin_map is None) != (self.fitness is None):
            raise ValueError("basin_map and fitness must be set together (by fitting)")
        if self.fitness is not None and not 0 <= self.fitness <= 1:
            raise ValueError("fitness must lie in [0, 1]")
        if self.basin_map is not None:
            for key, vote in self.basin_map.items():
                if vote.confidence < _HALF or vote.confidence > 1:
                    raise ValueError(f"basin {key}: confidence {vote.confidence} not in [1/2, 1]")

    @property
    def fitted(self) -> bool:
        return self.basin_map is not None

    @property
    def length(self) -> int:
        return self.T.length

    def rule_bytes(self) -> bytes:
        """Canonical byte encoding of the rule (ignores fitted state)."""
        return self.T.masks.tobytes() + self.F.bits.tobytes()


def _quantized_levels(finals: np.ndarray, k: int) -> np.ndarray:
    return np.floor(finals * (k - 1) + 0.5).astype(np.int8)


def _level_key(levels_row: np.ndarray) -> str:
    return "|".join(str(int(v)) for v in levels_row)


def _check_fit_args(configs, positive_mask):
    if configs.ndim != 2:
        raise ValueError("configs must be 2-d (instances x cells)")
    if configs.shape[0] == 0:
        raise ValueError("cannot fit on an empty training set")
    if len(positive_mask) != configs.shape[0]:
        raise ValueError("one positive/negative flag per training configuration required")


def _tally(T, F, configs, positive_mask, params):
    """Per-basin (positive, negative) training counts keyed by level bytes."""
    finals, _, _ = evolve_batch(T, F, configs, params)
    levels = _quantized_levels(finals, params.quant_levels)
    counts: dict[bytes, list[int]] = {}
    for row in range(levels.shape[0]):
        pair = counts.setdefault(levels[row].tobytes(), [0, 0])
        pair[0 if positive_mask[row] else 1] += 1
    return counts


def fit_basins(
    T: DependencyMatrix,
    F: ComplementVector,
    configs,
    positive_mask,
    params: EvolutionParams | None = None,
) -> tuple[dict[str, BasinVote], Fraction]:
    """Fit the basin map of one rule on a two-class training set.

    Each attractor basin votes for the majority class of its training
    members; a tied basin votes negative.  Confidence is the majority
    fraction (exactly 1/2 on a tie).  Returns the map together with the
    fitness: the exact fraction of training instances whose own basin's
    vote matches their flag.
    """
    params = params or EvolutionParams()
    configs = np.ascontiguousarray(configs, dtype=np.float64)
    positive_mask = np.asarray(positive_mask, dtype=bool)
    _check_fit_args(configs, positive_mask)
    votes: dict[str, BasinVote] = {}
    correct = 0
    for key_bytes, (pos, neg) in _tally(T, F, configs, positive_mask, params).items():
        key = _level_key(np.frombuffer(key_bytes, dtype=np.int8))
        votes[key] = BasinVote(pos > neg, Fraction(max(pos, neg), pos + neg))
        correct += max(pos, neg)
    return votes, Fraction(correct, configs.shape[0])


def fit_chromosome(
    T: DependencyMatrix,
    F: ComplementVector,
    configs,
    positive_mask,
    params: EvolutionParams | None = None,
) -> FmacaChromosome:
    """Fit and return the chromosome carrying its basin map and fitness."""
    basin_map, ff = fit_basins(T, F, configs, positive_mask, params)
    return FmacaChromosome(T, F, basin_map, ff)


def training_fitness(
    T: DependencyMatrix,
    F: ComplementVector,
    configs,
    positive_mask,
    params: EvolutionParams | None = None,
) -> Fraction:
    """Fitness alone, skipping basin-map construction (trainer hot path).

    Equals the sum of per-basin majority counts over the total, since every
    instance is classified by the majority of its own basin.
    """
    params = params or EvolutionParams()
    configs = np.ascontiguousarray(configs, dtype=np.float64)
    positive_mask = np.asarray(positive_mask, dtype=bool)
    _check_fit_args(configs, positive_mask)
    correct = sum(
        max(pos, neg) for pos, neg in _tally(T, F, configs, positive_mask, params).values()
    )
    return Fraction(correct, configs.shape[0])


def _require_fitted(chromosome: FmacaChromosome):
    if not chromosome.fitted:
        raise ValueError("chromosome is not fitted (no basin map)")


def classify_stage_batch(
    chromosome: FmacaChromosome, configs, params: EvolutionParams | None = None
) -> list[StageResult]:
    """Basin vote of each configuration row under one fitted chromosome."""
    _require_fitted(chromosome)
    params = params or EvolutionParams()
    configs = np.ascontiguousarray(configs, dtype=np.float64)
    finals, _, _ = evolve_batch(chromosome.T, chromosome.F, configs, params)
    levels = _quantized_levels(finals, params.quant_levels)
    out = []
    for i in range(levels.shape[0]):
        vote = chromosome.basin_map.get(_level_key(levels[i]))
        if vote is None:
            out.append(StageResult(False, Fraction(0), UNSEEN))
        else:
            out.append(StageResult(vote.positive, vote.confidence, VOTED))
    return out


def classify_stage(
    chromosome: FmacaChromosome, config, params: EvolutionParams | None = None
) -> StageResult:
    """Basin vote of a single configuration (unseen basin: negative, 0)."""
    config = np.asarray(config, dtype=np.float64)
    return classify_stage_batch(chromosome, config[None, :], params)[0]


@dataclass(frozen=True)
class MacaCcTree:
    """Two-stage classification tree over the splice classes.

    Donor stage first on every query; its negatives descend to the acceptor
    stage; instances both stages reject are Neither.  A donor claim scores
    the donor vote alone; any prediction that consulted both stages scores
    the weaker of the two votes.
    """

    donor_stage: FmacaChromosome
    acceptor_stage: FmacaChromosome
    encoder: FuzzyEncoder
    evolution: EvolutionParams

    def __post_init__(self):
        for name, stage in (("donor", self.donor_stage), ("acceptor", self.acceptor_stage)):
            if not stage.fitted:
                raise ValueError(f"{name} stage is not fitted")
            if stage.length != WINDOW:
                raise ValueError(f"{name} stage is built for {stage.length} cells, not {WINDOW}")

    def classify_codes(self, configs) -> list[Prediction]:
        """Classify already-encoded windows (rows of cell values)."""
        configs = np.ascontiguousarray(configs, dtype=np.float64)
        if configs.ndim != 2:
            raise ValueError("configs must be 2-d (instances x cells)")
        donor_votes = classify_stage_batch(self.donor_stage, configs, self.evolution)
        out: list[Prediction | None] = [None] * configs.shape[0]
        descend = [i for i, res in enumerate(donor_votes) if not res.positive]
        for i, res in enumerate(donor_votes):
            if res.positive:
                out[i] = Prediction(ClassLabel.DONOR, res.confidence)
        if descend:
            acceptor_votes = classify_stage_batch(
                self.acceptor_stage, configs[descend], self.evolution
            )
            for row, res in zip(descend, acceptor_votes):
                score = min(donor_votes[row].confidence, res.confidence)
                label = ClassLabel.ACCEPTOR if res.positive else ClassLabel.NEITHER
                out[row] = Prediction(label, score)
        return out  # type: ignore[return-value]

    def classify_one_codes(self, config) -> Prediction:
        config = np.asarray(config, dtype=np.float64)
        return self.classify_codes(config[None, :])[0]


def classify(tree: MacaCcTree, sequence: str) -> Prediction:
    """Classify one 60-symbol nucleotide window."""
    if len(sequence) != WINDOW:
        raise ValueError(f"sequence length {len(sequence)} != {WINDOW}")
    return tree.classify_one_codes(tree.encoder.encode(sequence))
