"""Mixed-style training corpora: extractive and conversational targets
under one style-token scheme, with an optional balanced-subsampling mode."""

from __future__ import annotations

import enum
import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator

from . import __version__
from .dataset import NO_ANSWER_MARKER, QaExample
from .seqcodec import SourceSequence, StyleTag, TargetSequence, encode_source, encode_target

logger = logging.getLogger(__name__)

# Maps an example to the target ranking permutation over its source passages.
RankingProvider = Callable[[QaExample], tuple[int, ...]]


def source_order_ranking(example: QaExample) -> tuple[int, ...]:
    return tuple(range(len(example.passages)))


class MixMode(enum.Enum):
    CONCAT = "concat"
    BALANCED = "balanced"


@dataclass(frozen=True)
class MixPolicy:
    mode: MixMode = MixMode.CONCAT
    seed: int = 0
    shuffle: bool = False


@dataclass(frozen=True)
class CorpusRow:
    source: str
    target: str
    style: StyleTag
    origin: str

    def __post_init__(self):
        if not self.source.startswith(self.style.token() + " "):
            raise ValueError("style embedded in source does not match the style field")


def _row(example: QaExample, style: StyleTag, answer: str,
         ranking_provider: RankingProvider, origin: str) -> CorpusRow:
    source = encode_source(SourceSequence(
        style=style,
        question=example.query,
        passages=tuple((p.index, p.text) for p in example.passages),
    ))
    is_no_answer = not example.answerable
    target = encode_target(TargetSequence(
        ranking=ranking_provider(example),
        answer=NO_ANSWER_MARKER if is_no_answer else answer,
        is_no_answer=is_no_answer,
    ))
    return CorpusRow(source=source, target=target, style=style, origin=origin)


def build_mixed_corpus(
    extractive: Iterable[QaExample],
    conversational: Iterable[QaExample],
    policy: MixPolicy,
    ranking_provider: RankingProvider = source_order_ranking,
) -> Iterator[CorpusRow]:
    """Combine extractive and conversational examples into one corpus.

    Extractive rows carry style ``extract`` with the span answer as target;
    conversational rows carry style ``conv`` with the well-formed answer.
    Balanced mode subsamples each origin to the minimum origin size.
    """
    skipped = 0
    extract_rows = [
        _row(ex, StyleTag.EXTRACT, ex.answers[0] if ex.answers else NO_ANSWER_MARKER,
             ranking_provider, "extractive")
        for ex in extractive
    ]
    conv_rows = []
    for ex in conversational:
        if not ex.well_formed_answers:
            skipped += 1
            continue
        conv_rows.append(
            _row(ex, StyleTag.CONV, ex.well_formed_answers[0], ranking_provider, "conversational")
        )
    if skipped:
        logger.warning("skipped %d conversational examples lacking a well-formed answer", skipped)

    if policy.mode is MixMode.BALANCED:
        if not extract_rows or not conv_rows:
            raise ValueError("balanced mode requires both origins to be non-empty")
        floor = min(len(extract_rows), len(conv_rows))
        rng = random.Random(policy.seed)
        # Independent draws per origin so adding data to one origin never
        # perturbs the other origin's sample.
        extract_rows = [extract_rows[i] for i in sorted(rng.sample(range(len(extract_rows)), floor))]
        conv_rows = [conv_rows[i] for i in sorted(rng.sample(range(len(conv_rows)), floor))]

    rows = extract_rows + conv_rows
    if policy.shuffle:
        random.Random(policy.seed).shuffle(rows)
    yield from rows


def style_histogram(corpus: Iterable[CorpusRow]) -> dict[StyleTag, int]:
    counts: dict[StyleTag, int] = {}
    for row in corpus:
        counts[row.style] = counts.get(row.style, 0) + 1
    return counts


def write_corpus(rows: Iterable[CorpusRow], corpus_path: str | Path,
                 policy: MixPolicy) -> dict:
    """Write JSONL corpus plus a sidecar manifest; returns the manifest."""
    corpus_path = Path(corpus_path)
    origin_counts: dict[str, int] = {}
    n = 0
    with corpus_path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps({
                "source": row.source,
                "target": row.target,
                "style": row.style.value,
                "origin": row.origin,
            }, ensure_ascii=False) + "\n")
            origin_counts[row.origin] = origin_counts.get(row.origin, 0) + 1
            n += 1
    manifest = {
        "tool_version": __version__,
        "policy": {"mode": policy.mode.value, "seed": policy.seed, "shuffle": policy.shuffle},
        "rows": n,
        "origin_counts": origin_counts,
    }
    manifest_path = corpus_path.with_suffix(corpus_path.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def read_corpus(path: str | Path) -> Iterator[CorpusRow]:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            yield CorpusRow(
                source=record["source"],
                target=record["target"],
                style=StyleTag(record["style"]),
                origin=record["origin"],
            )
