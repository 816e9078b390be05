"""Whitespace word vocabulary for the toy seq2seq.

The harness grammar is whitespace-delimited, so word-level tokenization
round-trips source and target strings exactly, which is what the overfit
check needs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
UNK_ID = 3
_N_SPECIALS = 4


class WordVocab:
    def __init__(self, words: list[str]):
        self.words = list(words)
        self._index = {w: i + _N_SPECIALS for i, w in enumerate(self.words)}

    @classmethod
    def build(cls, texts: Iterable[str]) -> "WordVocab":
        seen: set[str] = set()
        for text in texts:
            seen.update(text.split())
        return cls(sorted(seen))

    def __len__(self) -> int:
        return len(self.words) + _N_SPECIALS

    def encode(self, text: str) -> list[int]:
        return [self._index.get(w, UNK_ID) for w in text.split()]

    def decode(self, ids: Iterable[int]) -> str:
        return " ".join(
            self.words[i - _N_SPECIALS] for i in ids if i >= _N_SPECIALS
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.words, ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "WordVocab":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))
