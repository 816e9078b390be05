"""End-to-end evaluation orchestration, independent of the CLI surface."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .client import GenerationRecord
from .dataset import QaExample
from .errors import DataError
from .factuality import (
    FactualityReport,
    NliBackend,
    corpus_rates,
    na_judge,
    np_judge,
)
from .metrics import MetricConfig, MetricReport, evaluate_corpus
from .ranking import (
    RankingQualityReport,
    RankingScores,
    mean_reciprocal_rank,
    ranking_agreement,
    top_k_accuracy,
)
from .seqcodec import complete_ranking


@dataclass
class EvaluationResult:
    metrics: MetricReport
    factuality: FactualityReport
    ranking: RankingQualityReport | None
    coverage: dict = field(default_factory=dict)


def load_scores(path: str | Path) -> dict[str, RankingScores]:
    """Scores file: JSONL {query_id, scores:[...]}, one line per example."""
    out: dict[str, RankingScores] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                out[str(record["query_id"])] = RankingScores(
                    query_id=str(record["query_id"]),
                    scores=tuple(float(s) for s in record["scores"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataError(f"bad scores record: {exc}", line=lineno) from exc
    return out


def _references(example: QaExample) -> list[str]:
    refs = list(example.well_formed_answers) or list(example.answers)
    return [r for r in refs if r.strip()]


def evaluate(
    examples: Sequence[QaExample],
    predictions: Sequence[GenerationRecord],
    nli: NliBackend | None,
    metric_cfg: MetricConfig | None = None,
    scores: dict[str, RankingScores] | None = None,
    top_ks: Sequence[int] = (1, 3, 5),
) -> EvaluationResult:
    """Score predictions against gold examples.

    Text metrics cover answerable gold examples with a non-no-answer
    prediction; answerability F1 covers every predicted example; N-P/N-A
    exclude no-answer predictions.  Examples lacking a prediction are
    counted and reported, not fatal.
    """
    metric_cfg = metric_cfg or MetricConfig()
    by_id = {p.query_id: p for p in predictions}
    if not any(ex.query_id in by_id for ex in examples):
        raise DataError("zero prediction coverage: no query_id overlaps the gold data")

    candidates: list[str] = []
    references: list[list[str]] = []
    predicted_answerable: list[bool] = []
    gold_answerable: list[bool] = []
    nli_rows: list[tuple[str, bool, bool]] = []
    rank_rows: list[tuple[tuple[int, ...], set[int]]] = []
    taus: list[float] = []
    missing = 0

    for example in sorted(examples, key=lambda e: e.query_id):
        prediction = by_id.get(example.query_id)
        if prediction is None:
            missing += 1
            continue
        parsed = prediction.parsed
        predicted_answerable.append(not parsed.is_no_answer)
        gold_answerable.append(example.answerable)

        refs = _references(example)
        if example.answerable and not parsed.is_no_answer and refs:
            candidates.append(parsed.answer)
            references.append(refs)
            if nli is not None and parsed.answer.strip():
                factual, _ = np_judge(
                    parsed.answer, [p.text for p in example.passages], nli
                )
                correct, _, _ = na_judge(parsed.answer, refs[0], nli)
                nli_rows.append((example.query_id, factual, correct))

        if parsed.ranking:
            gold = {p.index for p in example.passages if p.is_selected}
            permutation = complete_ranking(parsed, len(example.passages))
            rank_rows.append((permutation, gold))
            if scores and example.query_id in scores:
                reference = tuple(sorted(
                    range(len(example.passages)),
                    key=lambda i: (-scores[example.query_id].scores[i], i),
                ))
                if len(reference) == len(permutation):
                    taus.append(ranking_agreement(permutation, reference))

    metrics = evaluate_corpus(
        candidates, references, metric_cfg,
        predicted_answerable=predicted_answerable,
        gold_answerable=gold_answerable,
    )
    factuality = corpus_rates(nli_rows)
    ranking_report = None
    if rank_rows:
        ranking_report = RankingQualityReport(
            top_k_accuracy={k: top_k_accuracy(rank_rows, k) for k in top_ks},
            mean_reciprocal_rank=mean_reciprocal_rank(rank_rows),
            kendall_tau=sum(taus) / len(taus) if taus else None,
            n_examples=len(rank_rows),
        )
    coverage = {
        "examples": len(examples),
        "predicted": len(examples) - missing,
        "missing_predictions": missing,
    }
    return EvaluationResult(
        metrics=metrics, factuality=factuality, ranking=ranking_report, coverage=coverage
    )
