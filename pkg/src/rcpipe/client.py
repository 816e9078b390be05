"""Batch client for an external generation service.

Cache-first: hits never touch the network, misses go out with bounded
retries and exponential backoff, and results land back in a JSONL disk
cache keyed by (source string, backend id).
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import requests

from .errors import BackendError, DataError
from .seqcodec import ParsedGeneration, StyleTag, parse_generated

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenerationRequest:
    query_id: str
    source: str
    max_new_tokens: int
    style: StyleTag
    n_passages: int = 10


@dataclass(frozen=True)
class GenerationRecord:
    query_id: str
    raw: str
    parsed: ParsedGeneration
    backend_id: str
    latency_ms: int


def _cache_key(source: str, backend_id: str) -> str:
    blob = source + "\x1f" + backend_id
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class GenerationCache:
    """Append-only JSONL store of raw generations keyed by (source, backend)."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, str] = {}
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        record = json.loads(line)
                        self._entries[record["key"]] = record["raw"]

    def get(self, source: str, backend_id: str) -> str | None:
        return self._entries.get(_cache_key(source, backend_id))

    def put(self, source: str, backend_id: str, raw: str) -> None:
        key = _cache_key(source, backend_id)
        with self._lock:
            self._entries[key] = raw
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({"key": key, "raw": raw}, ensure_ascii=False) + "\n")


class GenerationClient:
    def __init__(self, endpoint: str, backend_id: str = "default",
                 max_retries: int = 3, backoff_s: float = 0.5, timeout_s: float = 120.0,
                 max_in_flight: int = 4, session: requests.Session | None = None):
        self.endpoint = endpoint.rstrip("/")
        self.backend_id = backend_id
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.timeout_s = timeout_s
        self.max_in_flight = max_in_flight
        self._session = session or requests.Session()
        self.network_calls = 0

    def _generate_one(self, request: GenerationRequest) -> str:
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                self.network_calls += 1
                response = self._session.post(
                    f"{self.endpoint}/generate",
                    json={"source": request.source, "max_new_tokens": request.max_new_tokens},
                    timeout=self.timeout_s,
                )
                response.raise_for_status()
                return response.json()["text"]
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.max_retries:
                    time.sleep(self.backoff_s * (2**attempt))
        raise BackendError(f"generation failed after {self.max_retries} attempts: {last_error}",
                           query_ids=[request.query_id])

    def generate_batch(
        self, requests_: Sequence[GenerationRequest], cache: GenerationCache
    ) -> list[GenerationRecord]:
        """Resolve a batch cache-first, preserving input order.

        Raises BackendError listing every failed query_id once retries are
        exhausted; successful slots are still written to the cache first.
        """
        results: list[GenerationRecord | None] = [None] * len(requests_)
        misses: list[int] = []
        for i, request in enumerate(requests_):
            cached = cache.get(request.source, self.backend_id)
            if cached is not None:
                results[i] = GenerationRecord(
                    query_id=request.query_id,
                    raw=cached,
                    parsed=parse_generated(cached, request.n_passages),
                    backend_id=self.backend_id,
                    latency_ms=0,
                )
            else:
                misses.append(i)

        failures: dict[str, Exception] = {}

        def fetch(i: int) -> None:
            request = requests_[i]
            started = time.monotonic()
            try:
                raw = self._generate_one(request)
            except BackendError as exc:
                failures[request.query_id] = exc
                return
            cache.put(request.source, self.backend_id, raw)
            results[i] = GenerationRecord(
                query_id=request.query_id,
                raw=raw,
                parsed=parse_generated(raw, request.n_passages),
                backend_id=self.backend_id,
                latency_ms=int(1000 * (time.monotonic() - started)),
            )

        if misses:
            with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                list(pool.map(fetch, misses))
        if failures:
            error = BackendError("generation failed for some requests",
                                 query_ids=sorted(failures))
            # Successful slots stay available to callers; failed slots are None.
            error.partial = results
            raise error
        return [r for r in results if r is not None]


def load_predictions(path: str | Path, n_passages: int = 10) -> list[GenerationRecord]:
    """Read a JSONL prediction file of {query_id, raw}.

    Duplicate query_ids resolve keep-last with a logged warning.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"prediction file not found: {path}")
    by_id: dict[str, GenerationRecord] = {}
    duplicates = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                query_id, raw = str(record["query_id"]), record["raw"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"bad prediction record: {exc}", line=lineno) from exc
            if query_id in by_id:
                duplicates += 1
            by_id[query_id] = GenerationRecord(
                query_id=query_id,
                raw=raw,
                parsed=parse_generated(raw, n_passages),
                backend_id="file",
                latency_ms=0,
            )
    if duplicates:
        logger.warning("resolved %d duplicate query_ids keep-last in %s", duplicates, path)
    return list(by_id.values())
