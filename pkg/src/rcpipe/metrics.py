"""Answer-quality metrics: BLEU-n, ROUGE-L, METEOR, and answerability F1.

ROUGE-L and METEOR take the max over references; BLEU uses native
multi-reference clipping at the corpus level.  All scores live in [0, 1]
here; reports scale to percentages.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .stemming import porter_stem

_TOKEN = re.compile(r"\w+|[^\w\s]", re.UNICODE)
_BLEU_EPSILON = 1e-9


@dataclass(frozen=True)
class MeteorWeights:
    alpha: float = 0.9
    beta_pen: float = 3.0
    gamma: float = 0.5


@dataclass(frozen=True)
class MetricConfig:
    lowercase: bool = True
    rouge_beta: float = 1.2
    bleu_max_n: int = 4
    meteor_weights: MeteorWeights = field(default_factory=MeteorWeights)

    def __post_init__(self):
        if self.rouge_beta <= 0:
            raise ValueError("rouge_beta must be positive")
        if self.bleu_max_n not in (1, 2, 3, 4):
            raise ValueError("bleu_max_n must be in 1..4")


@dataclass(frozen=True)
class MetricReport:
    """Corpus-level percentages in [0, 100]."""

    b1: float
    b4: float
    rouge_l: float
    meteor: float
    answerability_f1: float | None
    n_examples: int


def tokenize(text: str, cfg: MetricConfig | None = None) -> list[str]:
    """Lowercase (if configured), split punctuation into standalone tokens."""
    cfg = cfg or MetricConfig()
    if cfg.lowercase:
        text = text.lower()
    return _TOKEN.findall(text)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, bottom-up with a rolling row."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(
    candidate: Sequence[str],
    references: Sequence[Sequence[str]],
    beta: float = 1.2,
) -> float:
    """LCS-based F-measure, max over references."""
    if not references:
        raise ValueError("at least one reference is required")
    best = 0.0
    for ref in references:
        ell = lcs_length(candidate, ref)
        if ell == 0 or not candidate or not ref:
            continue
        precision = ell / len(candidate)
        recall = ell / len(ref)
        f = (1 + beta**2) * precision * recall / (recall + beta**2 * precision)
        best = max(best, f)
    return best


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    candidates: Sequence[Sequence[str]],
    references: Sequence[Sequence[Sequence[str]]],
    max_n: int = 4,
) -> float:
    """Corpus-level BLEU with clipped precisions and brevity penalty.

    Zero higher-order match counts get an additive epsilon so the geometric
    mean stays defined; the brevity penalty uses the closest reference
    length per example.
    """
    if not candidates:
        raise ValueError("empty corpus")
    if len(candidates) != len(references):
        raise ValueError("candidates and references must be aligned")
    matches = [0] * max_n
    totals = [0] * max_n
    cand_len = 0
    ref_len = 0
    for cand, refs in zip(candidates, references):
        if not refs:
            raise ValueError("every candidate needs at least one reference")
        cand_len += len(cand)
        ref_len += min((len(r) for r in refs), key=lambda l: (abs(l - len(cand)), l))
        for n in range(1, max_n + 1):
            cand_counts = _ngram_counts(cand, n)
            if not cand_counts:
                continue
            max_ref = Counter()
            for ref in refs:
                for gram, count in _ngram_counts(ref, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            totals[n - 1] += sum(cand_counts.values())
            matches[n - 1] += sum(
                min(count, max_ref[gram]) for gram, count in cand_counts.items()
            )
    # Orders with no n-grams anywhere in the corpus (all candidates shorter
    # than n) drop out of the geometric mean instead of zeroing it.
    effective = [n for n in range(1, max_n + 1) if totals[n - 1] > 0]
    if not effective:
        return 0.0
    log_sum = 0.0
    for n in effective:
        m, t = matches[n - 1], totals[n - 1]
        if m == 0:
            if n == 1:
                return 0.0
            m = _BLEU_EPSILON
        log_sum += math.log(m / t) / len(effective)
    if cand_len == 0:
        return 0.0
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_sum)


def _align(candidate: Sequence[str], reference: Sequence[str]) -> list[tuple[int, int]]:
    """Unigram alignment: exact stage then stem stage, preferring
    ref positions that continue the previous match (fewer chunks)."""
    matched_cand: dict[int, int] = {}
    used_ref: set[int] = set()
    for key_fn in (lambda t: t, porter_stem):
        ref_keys = [key_fn(t) for t in reference]
        prev_ref = -2
        for ci, token in enumerate(candidate):
            if ci in matched_cand:
                prev_ref = matched_cand[ci]
                continue
            key = key_fn(token)
            choices = [ri for ri, rk in enumerate(ref_keys) if rk == key and ri not in used_ref]
            if not choices:
                continue
            pick = prev_ref + 1 if prev_ref + 1 in choices else choices[0]
            matched_cand[ci] = pick
            used_ref.add(pick)
            prev_ref = pick
    return sorted(matched_cand.items())


def _chunks(alignment: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for ci, ri in alignment:
        if prev is None or ci != prev[0] + 1 or ri != prev[1] + 1:
            chunks += 1
        prev = (ci, ri)
    return chunks


def meteor(
    candidate: Sequence[str],
    references: Sequence[Sequence[str]],
    weights: MeteorWeights | None = None,
) -> float:
    """Harmonic-mean unigram score with a fragmentation penalty, max over
    references.  Matching stages: exact, then Porter-stemmed."""
    if not references:
        raise ValueError("at least one reference is required")
    w = weights or MeteorWeights()
    best = 0.0
    for ref in references:
        if not candidate or not ref:
            continue
        alignment = _align(candidate, ref)
        m = len(alignment)
        if m == 0:
            continue
        precision = m / len(candidate)
        recall = m / len(ref)
        f_mean = precision * recall / (w.alpha * precision + (1 - w.alpha) * recall)
        penalty = w.gamma * (_chunks(alignment) / m) ** w.beta_pen
        best = max(best, f_mean * (1 - penalty))
    return best


def answerability_f1(
    predicted: Sequence[bool], gold: Sequence[bool]
) -> tuple[float, float, float]:
    """Precision/recall/F1 over the answerable (positive) class."""
    if len(predicted) != len(gold):
        raise ValueError(f"length mismatch: {len(predicted)} vs {len(gold)}")
    tp = sum(1 for p, g in zip(predicted, gold) if p and g)
    fp = sum(1 for p, g in zip(predicted, gold) if p and not g)
    fn = sum(1 for p, g in zip(predicted, gold) if not p and g)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def evaluate_corpus(
    candidates: Sequence[str],
    references: Sequence[Sequence[str]],
    cfg: MetricConfig | None = None,
    predicted_answerable: Sequence[bool] | None = None,
    gold_answerable: Sequence[bool] | None = None,
) -> MetricReport:
    """Score a corpus of (candidate, references) text pairs.

    Text metrics are averaged over the scored examples (BLEU is computed
    corpus-level); answerability F1 is computed separately when the
    boolean label streams are provided.
    """
    cfg = cfg or MetricConfig()
    cand_tokens = [tokenize(c, cfg) for c in candidates]
    ref_tokens = [[tokenize(r, cfg) for r in refs] for refs in references]
    f1 = None
    if predicted_answerable is not None and gold_answerable is not None:
        _, _, f1 = answerability_f1(predicted_answerable, gold_answerable)
        f1 *= 100.0
    if not cand_tokens:
        return MetricReport(b1=0.0, b4=0.0, rouge_l=0.0, meteor=0.0,
                            answerability_f1=f1, n_examples=0)
    rl = sum(
        rouge_l(c, rs, cfg.rouge_beta) for c, rs in zip(cand_tokens, ref_tokens)
    ) / len(cand_tokens)
    mt = sum(
        meteor(c, rs, cfg.meteor_weights) for c, rs in zip(cand_tokens, ref_tokens)
    ) / len(cand_tokens)
    return MetricReport(
        b1=100.0 * bleu(cand_tokens, ref_tokens, max_n=1),
        b4=100.0 * bleu(cand_tokens, ref_tokens, max_n=4),
        rouge_l=100.0 * rl,
        meteor=100.0 * mt,
        answerability_f1=f1,
        n_examples=len(cand_tokens),
    )
