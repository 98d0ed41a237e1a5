"""Chunk knowledge: one generated title and three candidate questions per chunk.

The generation model is external; this module owns the client contract and a
deterministic mock so the whole pipeline runs offline. Remote wire contract:

    POST <endpoint>   {"texts": ["chunk text", ...]}
    response          {"results": [{"title": "...", "questions": ["?","?","?"]}, ...]}

with ``results`` position-aligned to ``texts``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import httpx

from .corpus import Chunk, split_sentences
from .errors import BackendUnavailable, ChunkexError, MalformedBackendOutput, MalformedRecord
from .remote import iter_batches, post_json, run_batches

QUESTIONS_PER_CHUNK = 3
_TITLE_TOKEN_LIMIT = 12
_WORD_RE = re.compile(r"\w+", re.UNICODE)
_QUOTE_PAIRS = (('"', '"'), ("'", "'"), ("“", "”"), ("‘", "’"))

_QUESTION_TEMPLATES = (
    "What does this passage say about {}?",
    "How is {} described in this passage?",
    "Why does this passage mention {}?",
)


@dataclass(frozen=True)
class ChunkKnowledge:
    """Generated title and exactly three candidate questions for one chunk."""

    chunk_id: str
    title: str
    questions: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.title or "\n" in self.title:
            raise ValueError(f"{self.chunk_id}: title must be non-empty and single-line")
        if len(self.questions) != QUESTIONS_PER_CHUNK or not all(self.questions):
            raise ValueError(
                f"{self.chunk_id}: expected exactly {QUESTIONS_PER_CHUNK} non-empty questions"
            )


class GeneratorBackend(Protocol):
    """Batch generator: chunk texts in, (title, three questions) pairs out."""

    name: str
    max_batch: int

    def generate(self, texts: Sequence[str]) -> list[tuple[str, list[str]]]: ...


def mock_generate(chunk_text: str) -> tuple[str, list[str]]:
    """Deterministic offline stand-in for the generation backend.

    Title: first sentence of the chunk, truncated to 12 whitespace tokens.
    Questions: three templated interrogatives, each embedding one of the
    chunk's distinct word tokens ranked by (length descending, lexicographic
    ascending); tokens are reused cyclically when fewer than three exist.
    """
    if not chunk_text.strip():
        raise ValueError("chunk_text must be non-empty")
    flat = " ".join(chunk_text.split())
    sentences = split_sentences(flat)
    first = sentences[0] if sentences else flat
    title = " ".join(first.split()[:_TITLE_TOKEN_LIMIT])

    tokens = sorted(set(_WORD_RE.findall(chunk_text)), key=lambda t: (-len(t), t))
    if not tokens:
        tokens = sorted(set(chunk_text.split()), key=lambda t: (-len(t), t))
    questions = [
        template.format(tokens[i % len(tokens)])
        for i, template in enumerate(_QUESTION_TEMPLATES)
    ]
    return title, questions


class MockGenerator:
    """In-process backend wrapping :func:`mock_generate`; records call sizes."""

    name = "mock"

    def __init__(self, max_batch: int = 16):
        self.max_batch = max_batch
        self.calls: list[int] = []

    def generate(self, texts: Sequence[str]) -> list[tuple[str, list[str]]]:
        self.calls.append(len(texts))
        return [mock_generate(text) for text in texts]


class HttpGenerator:
    """Client for a remote generation service (wire contract in module docstring)."""

    name = "remote-generator"

    def __init__(
        self,
        endpoint: str,
        max_batch: int = 16,
        client: httpx.Client | None = None,
        retries: int = 2,
        backoff: float = 0.25,
    ):
        self.endpoint = endpoint
        self.max_batch = max_batch
        self.retries = retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=30.0)

    def generate(self, texts: Sequence[str]) -> list[tuple[str, list[str]]]:
        data = post_json(
            self._client,
            self.endpoint,
            {"texts": list(texts)},
            retries=self.retries,
            backoff=self.backoff,
        )
        results = data.get("results")
        if not isinstance(results, list) or len(results) != len(texts):
            raise MalformedBackendOutput(
                None, f"expected {len(texts)} results, got {results!r:.80}"
            )
        pairs: list[tuple[str, list[str]]] = []
        for entry in results:
            if not isinstance(entry, dict):
                raise MalformedBackendOutput(None, "result entry is not an object")
            title = entry.get("title", "")
            questions = entry.get("questions", [])
            if not isinstance(title, str) or not isinstance(questions, list):
                raise MalformedBackendOutput(None, "result entry has wrong field types")
            pairs.append((title, [str(q) for q in questions]))
        return pairs


def sanitize_title(raw: str) -> str:
    """Normalize a generated title: newlines to spaces, outer quotes removed."""
    title = " ".join(raw.split())
    for opening, closing in _QUOTE_PAIRS:
        if len(title) >= 2 and title.startswith(opening) and title.endswith(closing):
            title = title[1:-1].strip()
    return title


@dataclass(frozen=True)
class GenerationFailure:
    chunk_id: str
    error: ChunkexError


@dataclass
class GenerationResult:
    """Per-chunk outcomes of a generation run, in input order."""

    knowledge: list[ChunkKnowledge]
    failures: list[GenerationFailure]

    def require_complete(self) -> list[ChunkKnowledge]:
        if self.failures:
            raise self.failures[0].error
        return self.knowledge


def _validate_pair(chunk_id: str, pair: tuple[str, list[str]]) -> ChunkKnowledge:
    raw_title, raw_questions = pair
    title = sanitize_title(raw_title)
    if not title:
        raise MalformedBackendOutput(chunk_id, "empty title")
    questions = [q.strip() for q in raw_questions]
    if len(questions) != QUESTIONS_PER_CHUNK or not all(questions):
        raise MalformedBackendOutput(
            chunk_id,
            f"expected {QUESTIONS_PER_CHUNK} non-empty questions, got {len(questions)}",
        )
    return ChunkKnowledge(chunk_id=chunk_id, title=title, questions=tuple(questions))


def generate_knowledge(
    chunks: Sequence[Chunk],
    backend: GeneratorBackend,
    batch: int = 16,
    max_in_flight: int = 1,
) -> GenerationResult:
    """Generate knowledge for every chunk, batching requests.

    Requests go out in consecutive batches of at most ``batch`` (which must
    not exceed the backend's ``max_batch``), up to ``max_in_flight``
    concurrently. A batch that fails after retries, or a chunk whose payload
    is malformed, becomes a per-chunk failure without aborting other batches.
    """
    if batch < 1:
        raise ValueError(f"batch must be positive, got {batch}")
    if batch > backend.max_batch:
        raise ValueError(f"batch {batch} exceeds backend max_batch {backend.max_batch}")
    if not chunks:
        return GenerationResult(knowledge=[], failures=[])

    batches = iter_batches(list(chunks), batch)

    def run_one(batch_chunks: Sequence[Chunk]) -> list[ChunkKnowledge | GenerationFailure]:
        try:
            pairs = backend.generate([c.text for c in batch_chunks])
        except (BackendUnavailable, MalformedBackendOutput) as exc:
            return [GenerationFailure(c.chunk_id, exc) for c in batch_chunks]
        if len(pairs) != len(batch_chunks):
            error = MalformedBackendOutput(
                None, f"backend returned {len(pairs)} results for {len(batch_chunks)} chunks"
            )
            return [GenerationFailure(c.chunk_id, error) for c in batch_chunks]
        outcomes: list[ChunkKnowledge | GenerationFailure] = []
        for chunk, pair in zip(batch_chunks, pairs):
            try:
                outcomes.append(_validate_pair(chunk.chunk_id, pair))
            except MalformedBackendOutput as exc:
                outcomes.append(GenerationFailure(chunk.chunk_id, exc))
        return outcomes

    knowledge: list[ChunkKnowledge] = []
    failures: list[GenerationFailure] = []
    for outcomes in run_batches(batches, run_one, max_in_flight=max_in_flight):
        for outcome in outcomes:
            if isinstance(outcome, ChunkKnowledge):
                knowledge.append(outcome)
            else:
                failures.append(outcome)
    return GenerationResult(knowledge=knowledge, failures=failures)


def write_knowledge(items: Iterable[ChunkKnowledge], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for item in items:
            record = {
                "chunk_id": item.chunk_id,
                "title": item.title,
                "questions": list(item.questions),
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_knowledge(path: str | Path) -> list[ChunkKnowledge]:
    items: list[ChunkKnowledge] = []
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                items.append(
                    ChunkKnowledge(
                        chunk_id=record["chunk_id"],
                        title=record["title"],
                        questions=tuple(record["questions"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(line_number, f"bad knowledge record: {exc}") from exc
    return items
