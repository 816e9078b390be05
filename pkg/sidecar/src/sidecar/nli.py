"""Three-way entailment scoring for the /nli endpoint.

A fine-tuned NLI checkpoint can be loaded from a local path; when none is
available (this environment cannot download pretrained weights) a
deterministic lexical-overlap classifier stands in.  It is a protocol
stand-in, not a competent NLI model, but it behaves sensibly on
paraphrase-style fixtures: full content overlap -> entail, conflicting
numbers -> contradict, otherwise neutral.
"""

from __future__ import annotations

import re
from pathlib import Path

_WORD = re.compile(r"\w+", re.UNICODE)
_NUMBER = re.compile(r"^\d[\d.,]*$")

_STOPWORDS = {
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "of", "in",
    "on", "at", "to", "for", "and", "or", "that", "this", "it", "its", "s",
}

LABELS = ("entail", "contradict", "neutral")


def _content_tokens(text: str) -> set[str]:
    return {w for w in _WORD.findall(text.lower()) if w not in _STOPWORDS}


def _scores_for(label: str, confidence: float) -> list[float]:
    # Distribute the remainder evenly so scores sum to 1 and argmax is label.
    confidence = min(max(confidence, 0.4), 0.99)
    rest = (1.0 - confidence) / 2
    return [confidence if name == label else rest for name in LABELS]


class LexicalOverlapNli:
    identifier = "lexical-overlap-heuristic"

    def judge(self, premise: str, hypothesis: str) -> tuple[str, list[float]]:
        hyp = _content_tokens(hypothesis)
        prem = _content_tokens(premise)
        if not hyp:
            return "neutral", _scores_for("neutral", 0.5)
        overlap = len(hyp & prem) / len(hyp)
        hyp_numbers = {t for t in hyp if _NUMBER.match(t)}
        prem_numbers = {t for t in prem if _NUMBER.match(t)}
        if hyp_numbers and prem_numbers and not (hyp_numbers & prem_numbers) and overlap >= 0.5:
            return "contradict", _scores_for("contradict", 0.5 + overlap / 4)
        if overlap >= 0.85:
            return "entail", _scores_for("entail", 0.6 + overlap / 3)
        return "neutral", _scores_for("neutral", 0.5 + (0.85 - overlap) / 4)


class TransformersNli:
    """Local sequence-classification checkpoint mapped to the wire labels."""

    # MNLI-style head order; remapped to the wire protocol's (e, c, n).
    _HF_ORDER = {"entailment": "entail", "contradiction": "contradict", "neutral": "neutral"}

    def __init__(self, checkpoint_dir: str | Path):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(checkpoint_dir)
        self.model = AutoModelForSequenceClassification.from_pretrained(checkpoint_dir).eval()
        self.identifier = str(checkpoint_dir)
        id2label = {
            int(i): self._HF_ORDER.get(name.lower(), name.lower())
            for i, name in self.model.config.id2label.items()
        }
        self._index_of = {label: i for i, label in id2label.items()}

    def judge(self, premise: str, hypothesis: str) -> tuple[str, list[float]]:
        with self._torch.no_grad():
            inputs = self.tokenizer(premise, hypothesis, return_tensors="pt", truncation=True)
            probs = self.model(**inputs).logits.softmax(dim=-1)[0]
        scores = [float(probs[self._index_of[label]]) for label in LABELS]
        total = sum(scores)
        scores = [s / total for s in scores]
        label = LABELS[max(range(3), key=lambda i: scores[i])]
        return label, scores


def load_nli(identifier: str | None):
    if identifier and Path(identifier).exists():
        return TransformersNli(identifier)
    return LexicalOverlapNli()
