"""Dataset ingestion: MS MARCO 2.1 and NarrativeQA into a uniform example model.

Loaders are single-pass streaming readers yielding immutable examples.
All text is NFC-normalized at load time so downstream tokenization is
stable regardless of how the source files were produced.
"""

from __future__ import annotations

import csv
import json
import random
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DataError

NO_ANSWER_MARKER = "No Answer Present."

# NarrativeQA's published CSVs call the middle split "valid"; we accept
# "dev" as an alias on our side.
_NARRATIVEQA_SPLIT_ALIASES = {"train": "train", "dev": "valid", "valid": "valid", "test": "test"}


def is_no_answer_text(text: str) -> bool:
    """Match the no-answer marker, ignoring case and an optional trailing period."""
    return text.strip().rstrip(".").lower() == NO_ANSWER_MARKER.rstrip(".").lower()


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class Passage:
    index: int
    text: str
    is_selected: bool = False
    url: str | None = None


@dataclass(frozen=True)
class QaExample:
    query_id: str
    query: str
    passages: tuple[Passage, ...]
    answers: tuple[str, ...]
    well_formed_answers: tuple[str, ...] = ()
    answerable: bool = True

    def __post_init__(self):
        if not self.query.strip():
            raise DataError(f"example {self.query_id}: empty query")
        seen = set()
        for p in self.passages:
            if p.index in seen:
                raise DataError(f"example {self.query_id}: duplicate passage index {p.index}")
            seen.add(p.index)
        if self.well_formed_answers and not self.answerable:
            raise DataError(f"example {self.query_id}: well-formed answers on unanswerable example")


@dataclass(frozen=True)
class DatasetSplit:
    name: str
    example_ids: tuple[str, ...]
    seed: int


def _well_formed(values: Iterable[str]) -> tuple[str, ...]:
    # The raw MS MARCO data uses "[]" as an empty sentinel inside the list.
    return tuple(_nfc(v) for v in values if v.strip() and v.strip() != "[]")


def _example_from_msmarco_record(record: dict, line: int) -> QaExample:
    for key in ("query_id", "query", "passages", "answers"):
        if key not in record:
            raise DataError("missing required field", line=line, field=key)
    try:
        passages = tuple(
            Passage(
                index=i,
                text=_nfc(p["passage_text"]),
                is_selected=bool(p.get("is_selected", 0)),
                url=p.get("url"),
            )
            for i, p in enumerate(record["passages"])
        )
    except (TypeError, KeyError) as exc:
        raise DataError(f"bad passage entry: {exc}", line=line, field="passages") from exc
    answers = tuple(_nfc(a) for a in record["answers"])
    answerable = not (answers and all(is_no_answer_text(a) for a in answers))
    well_formed = _well_formed(record.get("wellFormedAnswers", []))
    if not answerable:
        well_formed = ()
    return QaExample(
        query_id=str(record["query_id"]),
        query=_nfc(record["query"]),
        passages=passages,
        answers=answers,
        well_formed_answers=well_formed,
        answerable=answerable,
    )


def load_msmarco(path: str | Path, subset: str = "all") -> Iterator[QaExample]:
    """Stream MS MARCO 2.1 examples from a JSON Lines file.

    subset: "all" keeps everything, "answerable" drops no-answer examples,
    "nlgen" keeps only examples with a non-empty well-formed answer.
    """
    if subset not in ("all", "answerable", "nlgen"):
        raise ValueError(f"unknown subset {subset!r}")
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            example = _example_from_msmarco_record(record, lineno)
            if subset == "answerable" and not example.answerable:
                continue
            if subset == "nlgen" and not example.well_formed_answers:
                continue
            yield example


def load_narrativeqa(
    questions_path: str | Path,
    summaries_path: str | Path,
    split_filter: str | None = None,
) -> Iterator[QaExample]:
    """Stream NarrativeQA examples, joining questions to summaries on document id.

    Each question becomes one example with a single passage (the summary)
    and two reference answers; everything is answerable by construction.
    """
    if split_filter is not None and split_filter not in _NARRATIVEQA_SPLIT_ALIASES:
        raise ValueError(f"unknown split {split_filter!r}")
    wanted = _NARRATIVEQA_SPLIT_ALIASES[split_filter] if split_filter else None

    summaries: dict[str, str] = {}
    summaries_path = Path(summaries_path)
    if not summaries_path.exists():
        raise DataError(f"input file not found: {summaries_path}")
    with summaries_path.open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            summaries[row["document_id"]] = _nfc(row["summary"])

    questions_path = Path(questions_path)
    if not questions_path.exists():
        raise DataError(f"input file not found: {questions_path}")
    with questions_path.open(encoding="utf-8", newline="") as fh:
        for i, row in enumerate(csv.DictReader(fh)):
            if wanted and row["set"] != wanted:
                continue
            doc_id = row["document_id"]
            if doc_id not in summaries:
                raise DataError(f"question references missing document {doc_id!r}")
            answers = tuple(
                _nfc(row[k]) for k in ("answer1", "answer2") if row.get(k, "").strip()
            )
            yield QaExample(
                query_id=f"{doc_id}:{i}",
                query=_nfc(row["question"]),
                passages=(Passage(index=0, text=summaries[doc_id]),),
                answers=answers,
                answerable=True,
            )


def make_validation_split(
    train_ids: list[str], size: int, seed: int
) -> tuple[DatasetSplit, DatasetSplit]:
    """Hold out `size` ids for validation, deterministically in `seed`."""
    if size >= len(train_ids):
        raise ValueError(f"validation size {size} must be smaller than input size {len(train_ids)}")
    if size < 0:
        raise ValueError("validation size must be nonnegative")
    rng = random.Random(seed)
    held_out = set(rng.sample(range(len(train_ids)), size))
    validation = tuple(qid for i, qid in enumerate(train_ids) if i in held_out)
    remaining = tuple(qid for i, qid in enumerate(train_ids) if i not in held_out)
    return (
        DatasetSplit(name="validation", example_ids=validation, seed=seed),
        DatasetSplit(name="train", example_ids=remaining, seed=seed),
    )


# Canonical internal format: JSON Lines of QaExample, stable field order.

def example_to_dict(example: QaExample) -> dict:
    return {
        "query_id": example.query_id,
        "query": example.query,
        "passages": [
            {"index": p.index, "text": p.text, "is_selected": p.is_selected, "url": p.url}
            for p in example.passages
        ],
        "answers": list(example.answers),
        "well_formed_answers": list(example.well_formed_answers),
        "answerable": example.answerable,
    }


def example_from_dict(record: dict) -> QaExample:
    return QaExample(
        query_id=record["query_id"],
        query=record["query"],
        passages=tuple(
            Passage(index=p["index"], text=p["text"], is_selected=p["is_selected"], url=p.get("url"))
            for p in record["passages"]
        ),
        answers=tuple(record["answers"]),
        well_formed_answers=tuple(record.get("well_formed_answers", [])),
        answerable=record["answerable"],
    )


def write_examples(examples: Iterable[QaExample], path: str | Path) -> int:
    """Write examples in the canonical JSONL format; returns the row count."""
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for example in examples:
            fh.write(json.dumps(example_to_dict(example), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_examples(path: str | Path) -> Iterator[QaExample]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                yield example_from_dict(json.loads(raw))
            except (json.JSONDecodeError, KeyError) as exc:
                raise DataError(f"bad canonical record: {exc}", line=lineno) from exc
