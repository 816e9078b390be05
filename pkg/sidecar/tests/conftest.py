"""Shared fixtures: a small mixed-style corpus, a checkpoint overfit on it,
and a test client for the service.

The checkpoint is trained once per session (a few hundred full-batch steps
on 32 rows, well under a minute on CPU) and shared by the protocol and
overfit tests.
"""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from rcpipe.dataset import Passage, QaExample
from rcpipe.mst import MixMode, MixPolicy, build_mixed_corpus, write_corpus

from sidecar.app import ServiceConfig, create_app
from sidecar.generation import finetune_toy

_EXAMPLE_DATA = [
    ("population of albany mn", ["albany has 2,662 residents", "albany is in minnesota"],
     "2,662", "the population of albany is 2,662"),
    ("capital of france", ["paris is the capital of france", "france is in europe"],
     "paris", "the capital of france is paris"),
    ("how many terminals at jfk", ["jfk airport has six terminals", "jfk is in new york"],
     "six", "jfk airport has six passenger terminals"),
    ("who wrote hamlet", ["hamlet was written by shakespeare", "hamlet is a tragedy"],
     "shakespeare", "hamlet was written by william shakespeare"),
    ("boiling point of water", ["water boils at 100 degrees", "water is a liquid"],
     "100 degrees", "water boils at 100 degrees celsius"),
    ("largest planet", ["jupiter is the largest planet", "saturn has rings"],
     "jupiter", "the largest planet is jupiter"),
    ("speed of light", ["light travels at 299,792 km per second", "light is fast"],
     "299,792 km per second", "light travels at 299,792 kilometres per second"),
    ("author of dracula", ["dracula was written by bram stoker", "dracula is a novel"],
     "bram stoker", "dracula was written by bram stoker"),
    ("tallest mountain", ["everest is the tallest mountain", "k2 is second tallest"],
     "everest", "the tallest mountain is everest"),
    ("currency of japan", ["the yen is the currency of japan", "japan is an island"],
     "yen", "the currency of japan is the yen"),
    ("first us president", ["washington was the first president", "adams was second"],
     "washington", "the first us president was washington"),
    ("chemical symbol for gold", ["gold has the symbol au", "gold is a metal"],
     "au", "the chemical symbol for gold is au"),
    ("longest river", ["the nile is the longest river", "the amazon is widest"],
     "the nile", "the longest river is the nile"),
    ("smallest prime", ["two is the smallest prime number", "three is also prime"],
     "two", "the smallest prime number is two"),
    ("inventor of telephone", ["bell invented the telephone", "edison invented the bulb"],
     "bell", "the telephone was invented by bell"),
    ("continents on earth", ["earth has seven continents", "asia is the biggest"],
     "seven", "earth has seven continents"),
]


def _examples() -> list[QaExample]:
    out = []
    for i, (query, passages, span, well_formed) in enumerate(_EXAMPLE_DATA):
        out.append(QaExample(
            query_id=f"toy{i}",
            query=query,
            passages=tuple(
                Passage(index=j, text=text, is_selected=(j == 0))
                for j, text in enumerate(passages)
            ),
            answers=(span,),
            well_formed_answers=(well_formed,),
        ))
    return out


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    """32-row corpus: each base example in both styles."""
    path = tmp_path_factory.mktemp("corpus") / "toy.jsonl"
    examples = _examples()
    policy = MixPolicy(mode=MixMode.CONCAT, seed=0)
    rows = list(build_mixed_corpus(examples, examples, policy))
    assert len(rows) == 32
    write_corpus(rows, path, policy)
    return path


@pytest.fixture(scope="session")
def checkpoint(toy_corpus, tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("ckpt") / "toy-model"
    finetune_toy(toy_corpus, steps=400, out_dir=out_dir, seed=0)
    return out_dir


@pytest.fixture(scope="session")
def service_client(checkpoint):
    config = ServiceConfig(
        generation_checkpoint=str(checkpoint),
        max_new_tokens_cap=64,
    )
    with TestClient(create_app(config)) as client:
        yield client
