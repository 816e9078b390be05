"""Passage ordering from external reranker scores, and ranking-quality evaluation.

Three configurations: ranked_n sorts and truncates the passages fed to the
model, no_ranking keeps dataset order, and end_to_end keeps dataset order
in the source but teaches the ranking through the target segment.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dataset import Passage, QaExample


class RankingMode(enum.Enum):
    RANKED_N = "ranked_n"
    NO_RANKING = "no_ranking"
    END_TO_END = "end_to_end"


@dataclass(frozen=True)
class RankingScores:
    query_id: str
    scores: tuple[float, ...]

    def __post_init__(self):
        if any(not math.isfinite(s) for s in self.scores):
            raise ValueError(f"non-finite score for query {self.query_id}")


@dataclass(frozen=True)
class RankedConfig:
    mode: RankingMode
    top_n: int | None = None

    def __post_init__(self):
        if self.mode is RankingMode.RANKED_N:
            if self.top_n is None:
                raise ValueError("ranked_n mode requires top_n")
            if not 1 <= self.top_n <= 10:
                raise ValueError(f"top_n must be in 1..10, got {self.top_n}")
        elif self.top_n is not None:
            raise ValueError(f"top_n is only valid in ranked_n mode, not {self.mode.value}")


@dataclass(frozen=True)
class RankingQualityReport:
    top_k_accuracy: dict[int, float]
    mean_reciprocal_rank: float | None
    kendall_tau: float | None
    n_examples: int


def _argsort_desc(scores: Sequence[float]) -> list[int]:
    # Stable: ties keep ascending source position.
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


def apply_config(
    example: QaExample,
    scores: RankingScores | None,
    config: RankedConfig,
) -> tuple[tuple[Passage, ...], tuple[int, ...]]:
    """Order/truncate passages for the source and derive the target ranking.

    Returns (passages as fed to the model, target ranking permutation over
    the returned passages' positions).
    """
    if config.mode in (RankingMode.RANKED_N, RankingMode.END_TO_END):
        if scores is None:
            raise ValueError(f"{config.mode.value} mode requires reranker scores")
        if len(scores.scores) != len(example.passages):
            raise ValueError(
                f"query {example.query_id}: {len(scores.scores)} scores "
                f"for {len(example.passages)} passages"
            )
    if config.mode is RankingMode.RANKED_N:
        order = _argsort_desc(scores.scores)[: config.top_n]
        passages = tuple(
            Passage(index=new, text=example.passages[old].text,
                    is_selected=example.passages[old].is_selected,
                    url=example.passages[old].url)
            for new, old in enumerate(order)
        )
        return passages, tuple(range(len(passages)))
    if config.mode is RankingMode.NO_RANKING:
        return example.passages, tuple(range(len(example.passages)))
    # end_to_end: source keeps dataset order, target carries the sort.
    return example.passages, tuple(_argsort_desc(scores.scores))


def top_k_accuracy(
    rankings: Iterable[tuple[Sequence[int], set[int]]], k: int
) -> float:
    """Fraction of examples whose gold passage lands in the first k positions.

    Examples without any gold passage are excluded from the denominator.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    hits = total = 0
    for permutation, gold in rankings:
        if not gold:
            continue
        total += 1
        if any(idx in gold for idx in permutation[:k]):
            hits += 1
    return hits / total if total else 0.0


def mean_reciprocal_rank(rankings: Iterable[tuple[Sequence[int], set[int]]]) -> float:
    """Mean of 1/rank of the first gold passage; 0 contribution when absent."""
    total = 0.0
    n = 0
    for permutation, gold in rankings:
        if not gold:
            continue
        n += 1
        for pos, idx in enumerate(permutation, start=1):
            if idx in gold:
                total += 1.0 / pos
                break
    return total / n if n else 0.0


def ranking_agreement(predicted: Sequence[int], reference: Sequence[int]) -> float:
    """Kendall tau between two permutations of the same items."""
    if len(predicted) != len(reference):
        raise ValueError(f"length mismatch: {len(predicted)} vs {len(reference)}")
    if sorted(predicted) != sorted(reference):
        raise ValueError("inputs must be permutations of the same items")
    n = len(predicted)
    if n < 2:
        return 1.0
    pos_ref = {item: i for i, item in enumerate(reference)}
    discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            if pos_ref[predicted[i]] > pos_ref[predicted[j]]:
                discordant += 1
    pairs = n * (n - 1) // 2
    return 1.0 - 2.0 * discordant / pairs
