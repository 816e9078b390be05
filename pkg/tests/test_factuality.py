import json

import pytest

from rcpipe.errors import BackendError
from rcpipe.factuality import (
    CachedNliBackend,
    HumanAnnotation,
    NliLabel,
    NliVerdict,
    SubstringNliBackend,
    corpus_rates,
    human_agreement,
    na_judge,
    np_judge,
    read_human_annotations,
    verdict_key,
)


class ScriptedBackend:
    """Returns labels from a (premise, hypothesis) -> label table."""

    def __init__(self, table, default=NliLabel.NEUTRAL):
        self.table = table
        self.default = default
        self.calls = 0

    def judge(self, premise, hypothesis):
        self.calls += 1
        return NliVerdict(label=self.table.get((premise, hypothesis), self.default))


class TestNliVerdict:
    def test_scores_must_sum_to_one(self):
        with pytest.raises(ValueError):
            NliVerdict(label=NliLabel.ENTAIL, scores=(0.5, 0.1, 0.1))

    def test_argmax_must_match_label(self):
        with pytest.raises(ValueError):
            NliVerdict(label=NliLabel.ENTAIL, scores=(0.1, 0.2, 0.7))

    def test_valid_scores(self):
        verdict = NliVerdict(label=NliLabel.NEUTRAL, scores=(0.1, 0.2, 0.7))
        assert verdict.label is NliLabel.NEUTRAL


class TestNpJudge:
    def test_any_entailing_passage_suffices(self):
        backend = ScriptedBackend({("p2", "answer"): NliLabel.ENTAIL,
                                   ("p3", "answer"): NliLabel.CONTRADICT})
        factual, verdicts = np_judge("answer", ["p1", "p2", "p3"], backend)
        assert factual
        assert [v.label for v in verdicts] == [
            NliLabel.NEUTRAL, NliLabel.ENTAIL, NliLabel.CONTRADICT]

    def test_all_neutral_not_factual(self):
        factual, _ = np_judge("answer", ["p1", "p2"], ScriptedBackend({}))
        assert not factual

    def test_monotone_in_passages(self):
        backend = ScriptedBackend({("p1", "a"): NliLabel.ENTAIL})
        factual_small, _ = np_judge("a", ["p1"], backend)
        factual_large, _ = np_judge("a", ["p1", "p2", "p3"], backend)
        assert factual_small and factual_large

    def test_requires_passages_and_answer(self):
        with pytest.raises(ValueError):
            np_judge("a", [], ScriptedBackend({}))
        with pytest.raises(ValueError):
            np_judge("  ", ["p"], ScriptedBackend({}))

    def test_substring_stub_on_extractive_answer(self):
        # Deterministic end-to-end path with the substring stub.
        passage = ("With six terminals, the airlines that serve JFK airport "
                   "are spread across.")
        factual, _ = np_judge("six terminals", [passage], SubstringNliBackend())
        assert factual


class TestNaJudge:
    def test_bidirectional_entailment_required(self):
        both = ScriptedBackend({("g", "a"): NliLabel.ENTAIL, ("a", "g"): NliLabel.ENTAIL})
        assert na_judge("a", "g", both)[0]
        one_way = ScriptedBackend({("g", "a"): NliLabel.ENTAIL})
        assert not na_judge("a", "g", one_way)[0]

    def test_direction_assignment(self):
        backend = ScriptedBackend({("gold", "gen"): NliLabel.ENTAIL,
                                   ("gen", "gold"): NliLabel.NEUTRAL})
        correct, forward, backward = na_judge("gen", "gold", backend)
        assert forward.label is NliLabel.ENTAIL
        assert backward.label is NliLabel.NEUTRAL
        assert not correct

    def test_swap_symmetry(self):
        backend = ScriptedBackend({("g", "a"): NliLabel.ENTAIL,
                                   ("a", "g"): NliLabel.CONTRADICT})
        correct_ab, forward_ab, backward_ab = na_judge("a", "g", backend)
        correct_ba, forward_ba, backward_ba = na_judge("g", "a", backend)
        assert correct_ab == correct_ba
        assert forward_ab == backward_ba
        assert backward_ab == forward_ba


class TestCorpusRates:
    def test_appendix_label_arithmetic(self):
        np_labels = ["e", "e", "e", "c", "c", "n", "c"]
        na_labels = ["e", "n", "n", "c", "c", "c", "c"]
        rows = [
            (f"q{i}", np_label == "e", na_label == "e")
            for i, (np_label, na_label) in enumerate(zip(np_labels, na_labels))
        ]
        report = corpus_rates(rows)
        assert report.n_p_rate == pytest.approx(100 * 3 / 7)
        assert report.n_a_rate == pytest.approx(100 * 1 / 7)
        assert round(report.n_p_rate, 2) == 42.86
        assert round(report.n_a_rate, 2) == 14.29

    def test_all_factual(self):
        report = corpus_rates([("a", True, True), ("b", True, True)])
        assert report.n_p_rate == 100.0

    def test_single_negative(self):
        report = corpus_rates([("a", False, False)])
        assert (report.n_p_rate, report.n_a_rate) == (0.0, 0.0)

    def test_empty_corpus_rates_absent(self):
        report = corpus_rates([])
        assert report.n_p_rate is None
        assert report.n_a_rate is None

    def test_single_flip_changes_by_100_over_n(self):
        base = [(str(i), True, True) for i in range(10)]
        flipped = [("0", False, True)] + base[1:]
        delta = corpus_rates(base).n_p_rate - corpus_rates(flipped).n_p_rate
        assert delta == pytest.approx(100 / 10)


class TestHumanAgreement:
    def test_identical(self):
        auto = [("a", True, False), ("b", False, True)]
        human = [HumanAnnotation("a", True, False), HumanAnnotation("b", False, True)]
        assert human_agreement(auto, human) == (1.0, 1.0)

    def test_counting(self):
        auto = [("a", True, True), ("b", True, True), ("c", False, True)]
        human = [HumanAnnotation("a", True, True), HumanAnnotation("b", False, True),
                 HumanAnnotation("c", False, True)]
        np_agreement, na_agreement = human_agreement(auto, human)
        assert np_agreement == pytest.approx(2 / 3)
        assert na_agreement == 1.0

    def test_constructed_disagreement_fixture(self):
        auto = [(f"q{i}", True, True) for i in range(100)]
        human = [
            HumanAnnotation(f"q{i}", factual_vs_passage=i >= 10, correct_vs_gold=i >= 6)
            for i in range(100)
        ]
        assert human_agreement(auto, human) == (0.90, 0.94)

    def test_unmatched_id_raises(self):
        with pytest.raises(ValueError, match="zzz"):
            human_agreement([("zzz", True, True)], [HumanAnnotation("a", True, True)])


class TestVerdictCache:
    def test_read_through_and_warm_reuse(self, tmp_path):
        inner = ScriptedBackend({("p", "h"): NliLabel.ENTAIL})
        cache_path = tmp_path / "cache.jsonl"
        cache = CachedNliBackend(cache_path, inner)
        assert cache.judge("p", "h").label is NliLabel.ENTAIL
        assert cache.judge("p", "h").label is NliLabel.ENTAIL
        assert inner.calls == 1

        # Re-opened cache answers with zero backend calls.
        cold_inner = ScriptedBackend({})
        warm = CachedNliBackend(cache_path, cold_inner)
        assert warm.judge("p", "h").label is NliLabel.ENTAIL
        assert cold_inner.calls == 0

    def test_read_only_miss_is_error(self, tmp_path):
        cache = CachedNliBackend(tmp_path / "cache.jsonl")
        with pytest.raises(BackendError):
            cache.judge("p", "h")

    def test_key_is_unicode_normalization_stable(self):
        composed = "caf\u00e9"
        decomposed = "cafe\u0301"
        assert verdict_key(composed, "h") == verdict_key(decomposed, "h")

    def test_cache_file_schema(self, tmp_path):
        cache_path = tmp_path / "cache.jsonl"
        cache = CachedNliBackend(cache_path)
        cache.store("premise", "hypothesis", NliVerdict(label=NliLabel.NEUTRAL))
        record = json.loads(cache_path.read_text().strip())
        assert set(record) == {"key", "premise_hash", "hypothesis_hash", "label", "scores"}


def test_read_human_annotations(tmp_path):
    path = tmp_path / "human.csv"
    path.write_text(
        "query_id,factual_vs_passage,correct_vs_gold\n"
        "a,true,false\n"
        "b,1,0\n", encoding="utf-8")
    annotations = read_human_annotations(path)
    assert annotations == [
        HumanAnnotation("a", True, False),
        HumanAnnotation("b", True, False),
    ]
