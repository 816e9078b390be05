"""Serialization grammar for model source/target sequences.

Source strings look like
``s:conv </s> q: <question> </s> p0: <text> </s> p1: <text> </s>``
and targets like ``p1: p2: p0: <answer>``.  Parsing of generated text is
total: any unicode string comes back as a ParsedGeneration, with
malformations surfaced as diagnostics instead of exceptions.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from .dataset import NO_ANSWER_MARKER, is_no_answer_text

SEPARATOR = "</s>"
SPAN_OPEN = "<a>"
SPAN_CLOSE = "</a>"

_RANK_TOKEN = re.compile(r"p(\d+):")


class StyleTag(enum.Enum):
    EXTRACT = "extract"
    CONV = "conv"

    def token(self) -> str:
        return f"s:{self.value}"


class Diagnostic(str, enum.Enum):
    DUPLICATE_INDEX = "duplicate_index"
    MISSING_INDEX = "missing_index"
    OUT_OF_RANGE = "out_of_range"
    EMPTY_ANSWER = "empty_answer"


@dataclass(frozen=True)
class SourceSequence:
    style: StyleTag
    question: str
    passages: tuple[tuple[int, str], ...]
    # (passage source_index, char start, char end); answer-span mode only
    span_markup: tuple[int, int, int] | None = None
    answer_only: str | None = None

    def __post_init__(self):
        indices = [i for i, _ in self.passages]
        if indices != list(range(len(indices))):
            raise ValueError(f"passage indices must be contiguous from 0, got {indices}")
        if self.span_markup is not None and self.answer_only is not None:
            raise ValueError("span_markup and answer_only are mutually exclusive")
        if self.span_markup is not None:
            idx, start, end = self.span_markup
            if idx >= len(self.passages):
                raise ValueError(f"span passage index {idx} out of range")
            text = self.passages[idx][1]
            if not (0 <= start <= end <= len(text)):
                raise ValueError(f"span [{start}:{end}] outside passage of length {len(text)}")


@dataclass(frozen=True)
class TargetSequence:
    ranking: tuple[int, ...]
    answer: str
    is_no_answer: bool = False

    def __post_init__(self):
        if len(set(self.ranking)) != len(self.ranking):
            raise ValueError(f"ranking has duplicate indices: {self.ranking}")
        if any(i < 0 for i in self.ranking):
            raise ValueError(f"ranking has negative indices: {self.ranking}")
        if self.is_no_answer and not is_no_answer_text(self.answer):
            raise ValueError("is_no_answer target must carry the no-answer marker as its answer")


@dataclass(frozen=True)
class ParsedGeneration:
    ranking: tuple[int, ...]
    answer: str
    is_no_answer: bool
    diagnostics: tuple[Diagnostic, ...] = ()


def _check_no_separator(name: str, value: str) -> None:
    if SEPARATOR in value:
        raise ValueError(f"{name} contains the reserved separator {SEPARATOR!r}")


def encode_source(source: SourceSequence) -> str:
    """Render a SourceSequence as the model input string."""
    _check_no_separator("question", source.question)
    parts = [source.style.token(), SEPARATOR, "q:", source.question]
    if source.answer_only is not None:
        _check_no_separator("answer_only", source.answer_only)
        # Answer-only mode stands in for the whole passage list and carries
        # no trailing separator.
        parts += [SEPARATOR, "p0:", source.answer_only]
        return " ".join(parts)
    for idx, text in source.passages:
        _check_no_separator(f"passage {idx}", text)
        if source.span_markup is not None and source.span_markup[0] == idx:
            _, start, end = source.span_markup
            text = text[:start] + SPAN_OPEN + text[start:end] + SPAN_CLOSE + text[end:]
        parts += [SEPARATOR, f"p{idx}:", text]
    parts.append(SEPARATOR)
    return " ".join(parts)


def encode_target(target: TargetSequence) -> str:
    """Render a TargetSequence as ranking tokens followed by the answer."""
    tokens = [f"p{i}:" for i in target.ranking]
    tokens.append(target.answer)
    return " ".join(tokens)


def parse_generated(raw: str, n_passages: int) -> ParsedGeneration:
    """Recover ranking and answer from raw generated text.

    The leading run of in-range "p<i>:" tokens is the ranking; the first
    token that is not one (including out-of-range index tokens) ends the
    run permanently and starts the answer.  Total: never raises on text.
    """
    if n_passages < 1:
        raise ValueError("n_passages must be >= 1")
    diagnostics: list[Diagnostic] = []
    ranking: list[int] = []
    pos = 0
    text = raw.strip()
    while pos < len(text):
        match = _RANK_TOKEN.match(text, pos)
        if not match:
            break
        index = int(match.group(1))
        if index >= n_passages:
            break
        if index in ranking:
            if Diagnostic.DUPLICATE_INDEX not in diagnostics:
                diagnostics.append(Diagnostic.DUPLICATE_INDEX)
        else:
            ranking.append(index)
        pos = match.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    answer = text[pos:]
    # A truncated ranking only gets its own diagnostic when nothing else
    # already explains the shortfall; an empty run means no ranking segment
    # was attempted at all, which is legitimate for plain prose output.
    if ranking and len(ranking) < n_passages and not diagnostics:
        diagnostics.append(Diagnostic.MISSING_INDEX)
    no_answer = is_no_answer_text(answer)
    if not answer.strip() and not no_answer:
        diagnostics.append(Diagnostic.EMPTY_ANSWER)
    return ParsedGeneration(
        ranking=tuple(ranking),
        answer=answer,
        is_no_answer=no_answer,
        diagnostics=tuple(diagnostics),
    )


def complete_ranking(parsed: ParsedGeneration, n_passages: int) -> tuple[int, ...]:
    """Extend a parsed ranking to a full permutation, appending absent
    indices in source order."""
    seen = set(parsed.ranking)
    return parsed.ranking + tuple(i for i in range(n_passages) if i not in seen)


def roundtrip_check(target: TargetSequence, n_passages: int | None = None) -> bool:
    """True iff encoding then parsing reproduces the target with no diagnostics."""
    n = n_passages if n_passages is not None else max(len(target.ranking), 1)
    parsed = parse_generated(encode_target(target), n)
    return (
        parsed.ranking == tuple(target.ranking)
        and parsed.answer == target.answer
        and parsed.is_no_answer == target.is_no_answer
        and not parsed.diagnostics
    )


def no_answer_target(n_passages: int) -> TargetSequence:
    """Uniform-grammar no-answer target: ranking in source order plus the marker."""
    return TargetSequence(
        ranking=tuple(range(n_passages)), answer=NO_ANSWER_MARKER, is_no_answer=True
    )
