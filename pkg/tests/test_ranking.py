import itertools
import random

import pytest

from rcpipe.ranking import (
    RankedConfig,
    RankingMode,
    RankingScores,
    apply_config,
    mean_reciprocal_rank,
    ranking_agreement,
    top_k_accuracy,
)
from tests.conftest import make_example


def brute_force_tau(predicted, reference):
    """Independent oracle: sign comparison over all item pairs."""
    pos_p = {item: i for i, item in enumerate(predicted)}
    pos_r = {item: i for i, item in enumerate(reference)}
    concordant = discordant = 0
    for a, b in itertools.combinations(predicted, 2):
        sp = pos_p[a] - pos_p[b]
        sr = pos_r[a] - pos_r[b]
        if sp * sr > 0:
            concordant += 1
        else:
            discordant += 1
    total = concordant + discordant
    return (concordant - discordant) / total if total else 1.0


class TestApplyConfig:
    def test_ranked_n_sorts_and_truncates(self):
        example = make_example("q", "question", ["a", "b", "c"], ["ans"])
        scores = RankingScores(query_id="q", scores=(0.1, 0.9, 0.5))
        passages, ranking = apply_config(
            example, scores, RankedConfig(mode=RankingMode.RANKED_N, top_n=2))
        assert [p.text for p in passages] == ["b", "c"]
        assert [p.index for p in passages] == [0, 1]
        assert ranking == (0, 1)

    def test_end_to_end_keeps_source_order(self):
        example = make_example("q", "question", ["a", "b", "c"], ["ans"])
        scores = RankingScores(query_id="q", scores=(0.1, 0.9, 0.5))
        passages, ranking = apply_config(
            example, scores, RankedConfig(mode=RankingMode.END_TO_END))
        assert [p.text for p in passages] == ["a", "b", "c"]
        assert ranking == (1, 2, 0)

    def test_no_ranking_identity(self):
        example = make_example("q", "question", [f"p{i}" for i in range(10)], ["ans"])
        passages, ranking = apply_config(
            example, None, RankedConfig(mode=RankingMode.NO_RANKING))
        assert passages == example.passages
        assert ranking == tuple(range(10))

    def test_scores_required(self):
        example = make_example("q", "question", ["a"], ["ans"])
        with pytest.raises(ValueError):
            apply_config(example, None, RankedConfig(mode=RankingMode.END_TO_END))

    def test_length_mismatch(self):
        example = make_example("q", "question", ["a", "b"], ["ans"])
        with pytest.raises(ValueError):
            apply_config(example, RankingScores(query_id="q", scores=(1.0,)),
                         RankedConfig(mode=RankingMode.END_TO_END))

    def test_tie_stability(self):
        example = make_example("q", "question", ["a", "b", "c", "d"], ["ans"])
        scores = RankingScores(query_id="q", scores=(1.0, 1.0, 1.0, 1.0))
        _, ranking = apply_config(example, scores, RankedConfig(mode=RankingMode.END_TO_END))
        assert ranking == (0, 1, 2, 3)

    def test_end_to_end_ranking_sorts_scores(self):
        rng = random.Random(5)
        for _ in range(50):
            n = rng.randint(1, 10)
            values = tuple(rng.random() for _ in range(n))
            example = make_example("q", "question", [f"p{i}" for i in range(n)], ["a"])
            _, ranking = apply_config(
                example, RankingScores(query_id="q", scores=values),
                RankedConfig(mode=RankingMode.END_TO_END))
            ordered = [values[i] for i in ranking]
            assert ordered == sorted(ordered, reverse=True)

    def test_top_n_bounds(self):
        with pytest.raises(ValueError):
            RankedConfig(mode=RankingMode.RANKED_N, top_n=11)
        with pytest.raises(ValueError):
            RankedConfig(mode=RankingMode.RANKED_N)
        with pytest.raises(ValueError):
            RankedConfig(mode=RankingMode.NO_RANKING, top_n=3)

    def test_non_finite_scores_rejected(self):
        with pytest.raises(ValueError):
            RankingScores(query_id="q", scores=(float("nan"),))


class TestTopKAccuracy:
    def test_hit(self):
        assert top_k_accuracy([((1, 2, 0), {2})], k=2) == 1.0

    def test_miss(self):
        assert top_k_accuracy([((1, 2, 0), {0})], k=2) == 0.0

    def test_full_k_is_total(self):
        rng = random.Random(11)
        rankings = []
        for _ in range(100):
            permutation = list(range(10))
            rng.shuffle(permutation)
            rankings.append((tuple(permutation), {rng.randrange(10)}))
        assert top_k_accuracy(rankings, k=10) == 1.0

    def test_examples_without_gold_excluded(self):
        rankings = [((0, 1), {0}), ((0, 1), set())]
        assert top_k_accuracy(rankings, k=1) == 1.0

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            top_k_accuracy([], k=0)

    def test_nondecreasing_in_k(self):
        rng = random.Random(3)
        rankings = []
        for _ in range(50):
            permutation = list(range(8))
            rng.shuffle(permutation)
            rankings.append((tuple(permutation), {rng.randrange(8)}))
        accuracies = [top_k_accuracy(rankings, k) for k in range(1, 9)]
        assert accuracies == sorted(accuracies)


def test_mean_reciprocal_rank():
    assert mean_reciprocal_rank([((1, 0), {1})]) == 1.0
    assert mean_reciprocal_rank([((1, 0), {0})]) == 0.5
    assert mean_reciprocal_rank([((1, 0), {0}), ((0, 1), {0})]) == 0.75


class TestKendallTau:
    def test_identical(self):
        assert ranking_agreement([0, 1, 2], [0, 1, 2]) == 1.0

    def test_reversed(self):
        assert ranking_agreement([0, 1, 2], [2, 1, 0]) == -1.0

    def test_one_swap(self):
        assert ranking_agreement([0, 2, 1], [0, 1, 2]) == pytest.approx(1 - 2 / 3)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ranking_agreement([0, 1], [0, 1, 2])

    def test_against_brute_force(self):
        rng = random.Random(9)
        for _ in range(200):
            n = rng.randint(2, 8)
            predicted = list(range(n))
            reference = list(range(n))
            rng.shuffle(predicted)
            rng.shuffle(reference)
            assert ranking_agreement(predicted, reference) == pytest.approx(
                brute_force_tau(predicted, reference), abs=1e-12)
