"""NLI-based factuality (entailment vs. passage) and correctness
(bidirectional entailment vs. gold answer) evaluation.

The entailment backend is an interface: a remote HTTP service, a
read-through disk cache around any backend, or a read-only cache file for
fully offline fixture-driven runs.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import threading
import time
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import requests

from .errors import BackendError, DataError


class NliLabel(enum.Enum):
    ENTAIL = "entail"
    CONTRADICT = "contradict"
    NEUTRAL = "neutral"


_SCORE_ORDER = (NliLabel.ENTAIL, NliLabel.CONTRADICT, NliLabel.NEUTRAL)


@dataclass(frozen=True)
class NliVerdict:
    label: NliLabel
    scores: tuple[float, float, float] | None = None  # (entail, contradict, neutral)

    def __post_init__(self):
        if self.scores is None:
            return
        if any(s < 0 for s in self.scores):
            raise ValueError(f"negative NLI score in {self.scores}")
        if abs(sum(self.scores) - 1.0) > 1e-6:
            raise ValueError(f"NLI scores must sum to 1, got {sum(self.scores)}")
        argmax = _SCORE_ORDER[max(range(3), key=lambda i: self.scores[i])]
        if argmax is not self.label:
            raise ValueError(f"label {self.label.value} disagrees with score argmax {argmax.value}")


@dataclass(frozen=True)
class FactualityReport:
    n_p_rate: float | None  # percentage, None on an empty corpus
    n_a_rate: float | None
    n_examples: int
    per_example: tuple[tuple[str, bool, bool], ...]  # (query_id, factual, correct)


@dataclass(frozen=True)
class HumanAnnotation:
    query_id: str
    factual_vs_passage: bool
    correct_vs_gold: bool


class NliBackend(Protocol):
    def judge(self, premise: str, hypothesis: str) -> NliVerdict: ...


def verdict_key(premise: str, hypothesis: str) -> str:
    """Stable cache key over NFC-normalized premise/hypothesis."""
    blob = (
        unicodedata.normalize("NFC", premise)
        + "\x1f"
        + unicodedata.normalize("NFC", hypothesis)
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _text_hash(text: str) -> str:
    return hashlib.sha256(unicodedata.normalize("NFC", text).encode("utf-8")).hexdigest()[:16]


class HttpNliBackend:
    """Client for the /nli wire protocol with bounded retries."""

    def __init__(self, base_url: str, max_retries: int = 3, backoff_s: float = 0.5,
                 timeout_s: float = 30.0, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.timeout_s = timeout_s
        self._session = session or requests.Session()

    def judge(self, premise: str, hypothesis: str) -> NliVerdict:
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                response = self._session.post(
                    f"{self.base_url}/nli",
                    json={"premise": premise, "hypothesis": hypothesis},
                    timeout=self.timeout_s,
                )
                response.raise_for_status()
                body = response.json()
                scores = body.get("scores")
                return NliVerdict(
                    label=NliLabel(body["label"]),
                    scores=tuple(scores) if scores else None,
                )
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.max_retries:
                    time.sleep(self.backoff_s * (2**attempt))
        raise BackendError(f"NLI backend failed after {self.max_retries} attempts: {last_error}")


class SubstringNliBackend:
    """Deterministic stub: entail iff the premise contains the hypothesis."""

    def judge(self, premise: str, hypothesis: str) -> NliVerdict:
        if hypothesis.lower().strip() in premise.lower():
            return NliVerdict(label=NliLabel.ENTAIL)
        return NliVerdict(label=NliLabel.NEUTRAL)


class CachedNliBackend:
    """Read-through JSONL verdict cache around an optional inner backend.

    With no inner backend the cache is read-only and a miss is an error,
    which is exactly what fixture-driven offline evaluation wants.
    Concurrent reads are free; writes are serialized on a lock.
    """

    def __init__(self, cache_path: str | Path, inner: NliBackend | None = None):
        self.cache_path = Path(cache_path)
        self.inner = inner
        self._lock = threading.Lock()
        self._cache: dict[str, NliVerdict] = {}
        self.calls_to_inner = 0
        if self.cache_path.exists():
            with self.cache_path.open(encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        record = json.loads(line)
                        scores = record.get("scores")
                        self._cache[record["key"]] = NliVerdict(
                            label=NliLabel(record["label"]),
                            scores=tuple(scores) if scores else None,
                        )
                    except (json.JSONDecodeError, KeyError, ValueError) as exc:
                        raise DataError(f"bad verdict cache record: {exc}", line=lineno) from exc

    def judge(self, premise: str, hypothesis: str) -> NliVerdict:
        key = verdict_key(premise, hypothesis)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self.inner is None:
            raise BackendError(f"verdict cache miss with no backend (key {key[:12]}…)")
        verdict = self.inner.judge(premise, hypothesis)
        self.calls_to_inner += 1
        with self._lock:
            self._cache[key] = verdict
            with self.cache_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({
                    "key": key,
                    "premise_hash": _text_hash(premise),
                    "hypothesis_hash": _text_hash(hypothesis),
                    "label": verdict.label.value,
                    "scores": list(verdict.scores) if verdict.scores else None,
                }) + "\n")
        return verdict

    def store(self, premise: str, hypothesis: str, verdict: NliVerdict) -> None:
        """Preload a verdict, e.g. when installing fixture labels."""
        key = verdict_key(premise, hypothesis)
        with self._lock:
            self._cache[key] = verdict
            with self.cache_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({
                    "key": key,
                    "premise_hash": _text_hash(premise),
                    "hypothesis_hash": _text_hash(hypothesis),
                    "label": verdict.label.value,
                    "scores": list(verdict.scores) if verdict.scores else None,
                }) + "\n")


def np_judge(
    answer: str, passages: Sequence[str], nli: NliBackend
) -> tuple[bool, list[NliVerdict]]:
    """Factuality vs. the passages: entailed by at least one passage."""
    if not passages:
        raise ValueError("np_judge requires at least one passage")
    if not answer.strip():
        raise ValueError("np_judge requires a non-empty answer")
    verdicts = [nli.judge(premise=p, hypothesis=answer) for p in passages]
    factual = any(v.label is NliLabel.ENTAIL for v in verdicts)
    return factual, verdicts


def na_judge(
    generated: str, gold: str, nli: NliBackend
) -> tuple[bool, NliVerdict, NliVerdict]:
    """Correctness vs. the gold answer: entailment must hold both ways."""
    if not generated.strip() or not gold.strip():
        raise ValueError("na_judge requires non-empty generated and gold answers")
    forward = nli.judge(premise=gold, hypothesis=generated)
    backward = nli.judge(premise=generated, hypothesis=gold)
    correct = forward.label is NliLabel.ENTAIL and backward.label is NliLabel.ENTAIL
    return correct, forward, backward


def corpus_rates(verdicts: Sequence[tuple[str, bool, bool]]) -> FactualityReport:
    """Aggregate per-example (query_id, factual, correct) into rates."""
    n = len(verdicts)
    if n == 0:
        return FactualityReport(n_p_rate=None, n_a_rate=None, n_examples=0, per_example=())
    factual = sum(1 for _, f, _ in verdicts if f)
    correct = sum(1 for _, _, c in verdicts if c)
    return FactualityReport(
        n_p_rate=100.0 * factual / n,
        n_a_rate=100.0 * correct / n,
        n_examples=n,
        per_example=tuple(verdicts),
    )


def human_agreement(
    auto: Sequence[tuple[str, bool, bool]], human: Sequence[HumanAnnotation]
) -> tuple[float, float]:
    """Per-metric fraction of examples where the automated verdict matches
    the human annotation, aligned on query_id."""
    if len(auto) != len(human):
        raise ValueError(f"length mismatch: {len(auto)} auto vs {len(human)} human")
    by_id = {a.query_id: a for a in human}
    np_agree = na_agree = 0
    for query_id, factual, correct in auto:
        annotation = by_id.get(query_id)
        if annotation is None:
            raise ValueError(f"no human annotation for query_id {query_id!r}")
        np_agree += factual == annotation.factual_vs_passage
        na_agree += correct == annotation.correct_vs_gold
    n = len(auto)
    return np_agree / n, na_agree / n


def read_human_annotations(path: str | Path) -> list[HumanAnnotation]:
    """CSV columns: query_id, factual_vs_passage, correct_vs_gold."""
    truthy = {"1", "true", "yes", "y"}
    out = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(HumanAnnotation(
                query_id=row["query_id"],
                factual_vs_passage=row["factual_vs_passage"].strip().lower() in truthy,
                correct_vs_gold=row["correct_vs_gold"].strip().lower() in truthy,
            ))
    return out
