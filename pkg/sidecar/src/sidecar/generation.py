"""Toy seq2seq generation backend.

Pretrained checkpoints are not reachable from this environment, so the
model is a small randomly-initialized BART-architecture transformer with a
word-level vocabulary, trained from scratch by `finetune_toy`.  Greedy
decoding keeps outputs deterministic across runs.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import torch
from transformers import BartConfig, BartForConditionalGeneration

from .vocab import BOS_ID, EOS_ID, PAD_ID, WordVocab

logger = logging.getLogger(__name__)

VOCAB_FILE = "vocab.json"
META_FILE = "sidecar_meta.json"


def _tiny_config(vocab_size: int) -> BartConfig:
    return BartConfig(
        vocab_size=vocab_size,
        d_model=128,
        encoder_layers=2,
        decoder_layers=2,
        encoder_attention_heads=4,
        decoder_attention_heads=4,
        encoder_ffn_dim=256,
        decoder_ffn_dim=256,
        max_position_embeddings=512,
        pad_token_id=PAD_ID,
        bos_token_id=BOS_ID,
        eos_token_id=EOS_ID,
        decoder_start_token_id=EOS_ID,
        forced_bos_token_id=None,
        forced_eos_token_id=None,
    )


def _pad_batch(sequences: list[list[int]]) -> tuple[torch.Tensor, torch.Tensor]:
    length = max(len(s) for s in sequences)
    ids = torch.tensor([s + [PAD_ID] * (length - len(s)) for s in sequences])
    mask = torch.tensor([[1] * len(s) + [0] * (length - len(s)) for s in sequences])
    return ids, mask


def read_corpus_rows(corpus_path: str | Path) -> list[dict]:
    """Corpus file interface: JSONL rows with source/target/style/origin."""
    rows = []
    with Path(corpus_path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            row = json.loads(line)
            for key in ("source", "target"):
                if key not in row or not isinstance(row[key], str):
                    raise ValueError(f"corpus row {lineno} lacks a string {key!r} field")
            rows.append(row)
    return rows


class GenerationModel:
    def __init__(self, model: BartForConditionalGeneration, vocab: WordVocab,
                 identifier: str):
        self.model = model.eval()
        self.vocab = vocab
        self.identifier = identifier

    @classmethod
    def load(cls, checkpoint_dir: str | Path) -> "GenerationModel":
        checkpoint_dir = Path(checkpoint_dir)
        model = BartForConditionalGeneration.from_pretrained(checkpoint_dir)
        vocab = WordVocab.load(checkpoint_dir / VOCAB_FILE)
        meta = json.loads((checkpoint_dir / META_FILE).read_text(encoding="utf-8"))
        return cls(model, vocab, identifier=meta.get("identifier", str(checkpoint_dir)))

    def save(self, checkpoint_dir: str | Path) -> None:
        checkpoint_dir = Path(checkpoint_dir)
        checkpoint_dir.mkdir(parents=True, exist_ok=True)
        self.model.save_pretrained(checkpoint_dir)
        self.vocab.save(checkpoint_dir / VOCAB_FILE)
        (checkpoint_dir / META_FILE).write_text(
            json.dumps({"identifier": self.identifier}), encoding="utf-8")

    @torch.no_grad()
    def generate(self, source: str, max_new_tokens: int) -> str:
        ids, mask = _pad_batch([self.vocab.encode(source)])
        output = self.model.generate(
            input_ids=ids,
            attention_mask=mask,
            max_new_tokens=max_new_tokens,
            num_beams=1,
            do_sample=False,
        )
        return self.vocab.decode(output[0].tolist())


def finetune_toy(
    corpus_path: str | Path,
    steps: int,
    out_dir: str | Path,
    seed: int = 0,
    learning_rate: float = 3e-4,
    base: GenerationModel | None = None,
) -> GenerationModel:
    """Train the toy model on a corpus file for a bounded step count.

    With steps=0 the (possibly fresh) base model is saved unchanged.  An
    overfit run on a few dozen rows memorizes the targets verbatim.
    """
    rows = read_corpus_rows(corpus_path)
    if not rows:
        raise ValueError(f"empty corpus: {corpus_path}")
    torch.manual_seed(seed)
    if base is None:
        vocab = WordVocab.build(
            [row["source"] for row in rows] + [row["target"] for row in rows])
        model = BartForConditionalGeneration(_tiny_config(len(vocab)))
        base = GenerationModel(model, vocab, identifier=f"toy-seq2seq-seed{seed}")
    model, vocab = base.model, base.vocab

    src_ids, src_mask = _pad_batch([vocab.encode(row["source"]) for row in rows])
    tgt_ids, _ = _pad_batch(
        [[BOS_ID] + vocab.encode(row["target"]) + [EOS_ID] for row in rows])
    labels = tgt_ids.clone()
    labels[labels == PAD_ID] = -100

    optimizer = torch.optim.AdamW(model.parameters(), lr=learning_rate)
    model.train()
    for step in range(steps):
        optimizer.zero_grad()
        loss = model(input_ids=src_ids, attention_mask=src_mask, labels=labels).loss
        loss.backward()
        optimizer.step()
        if step % 100 == 0:
            logger.info("step %d loss %.4f", step, loss.item())
    model.eval()
    trained = GenerationModel(model, vocab, identifier=base.identifier)
    trained.save(out_dir)
    return trained
