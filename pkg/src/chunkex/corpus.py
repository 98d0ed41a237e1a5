"""Corpus loading and token-budgeted chunking.

Documents are split on paragraph boundaries (blank-line separated) first;
any paragraph that alone exceeds the token budget is split on sentence
boundaries; any single sentence still over budget cannot be represented
without truncation, so it is dropped and reported instead of silently
indexed. Consecutive units are greedily packed into chunks so the output
stays close to the budget without ever exceeding it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import DuplicateId, EmptyDocument, MalformedRecord
from .validation import check_positive_int

_PARAGRAPH_RE = re.compile(r"\n{2,}")
# Terminal punctuation (ASCII and full-width) followed by whitespace.
_SENTENCE_RE = re.compile(r"(?<=[.!?．！？。])\s+")


@dataclass(frozen=True)
class Document:
    """One input document; the unit of provenance for chunks."""

    doc_id: str
    text: str
    source: str | None = None

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if not self.text.strip():
            raise EmptyDocument(f"document {self.doc_id!r} has blank text")


@dataclass(frozen=True)
class Chunk:
    """One retrieval unit: a token-budgeted slice of a document."""

    chunk_id: str
    doc_id: str
    text: str
    token_count: int


@dataclass(frozen=True)
class TokenCounter:
    """A deterministic text -> token count function with a display name."""

    name: str
    count: Callable[[str], int]

    def __call__(self, text: str) -> int:
        return self.count(text)


WHITESPACE_COUNTER = TokenCounter("whitespace", lambda text: len(text.split()))


@dataclass(frozen=True)
class DroppedUnit:
    """An indivisible unit that exceeded the budget and was filtered out."""

    doc_id: str
    text: str
    token_count: int


@dataclass
class ChunkingResult:
    chunks: list[Chunk] = field(default_factory=list)
    dropped: list[DroppedUnit] = field(default_factory=list)


def split_paragraphs(text: str) -> list[str]:
    """Split on runs of two or more newlines; drops blank paragraphs."""
    normalized = text.replace("\r\n", "\n").replace("\r", "\n")
    return [p.strip() for p in _PARAGRAPH_RE.split(normalized) if p.strip()]


def split_sentences(paragraph: str) -> list[str]:
    """Split after terminal punctuation followed by whitespace."""
    return [s for s in _SENTENCE_RE.split(paragraph) if s.strip()]


def chunk_document(
    doc: Document,
    budget: int = 512,
    counter: TokenCounter = WHITESPACE_COUNTER,
) -> ChunkingResult:
    """Split ``doc`` into chunks whose token count never exceeds ``budget``.

    Greedy packing: consecutive units (paragraphs, or sentences of an
    over-budget paragraph) are accumulated while the joined text still fits.
    Chunk ids are ``doc_id + "#" + ordinal`` in document order. Dropped
    units are returned alongside the chunks so no text is lost silently.
    """
    check_positive_int(budget, "budget")
    if not doc.text.strip():
        raise EmptyDocument(f"document {doc.doc_id!r} has blank text")

    # (text, paragraph_index) units in document order.
    units: list[tuple[str, int]] = []
    dropped: list[DroppedUnit] = []
    for para_index, paragraph in enumerate(split_paragraphs(doc.text)):
        if counter(paragraph) <= budget:
            units.append((paragraph, para_index))
            continue
        for sentence in split_sentences(paragraph):
            n_tokens = counter(sentence)
            if n_tokens <= budget:
                units.append((sentence, para_index))
            else:
                dropped.append(DroppedUnit(doc.doc_id, sentence, n_tokens))

    chunks: list[Chunk] = []

    def flush(text: str) -> None:
        chunks.append(
            Chunk(
                chunk_id=f"{doc.doc_id}#{len(chunks)}",
                doc_id=doc.doc_id,
                text=text,
                token_count=counter(text),
            )
        )

    current = ""
    current_para = -1
    for text, para_index in units:
        if not current:
            current, current_para = text, para_index
            continue
        joiner = " " if para_index == current_para else "\n\n"
        candidate = current + joiner + text
        if counter(candidate) <= budget:
            current, current_para = candidate, para_index
        else:
            flush(current)
            current, current_para = text, para_index
    if current:
        flush(current)

    return ChunkingResult(chunks=chunks, dropped=dropped)


def chunk_documents(
    documents: Iterable[Document],
    budget: int = 512,
    counter: TokenCounter = WHITESPACE_COUNTER,
) -> ChunkingResult:
    """Chunk every document, concatenating results in corpus order."""
    combined = ChunkingResult()
    for doc in documents:
        result = chunk_document(doc, budget=budget, counter=counter)
        combined.chunks.extend(result.chunks)
        combined.dropped.extend(result.dropped)
    return combined


def load_corpus(path: str | Path) -> list[Document]:
    """Read a JSON Lines corpus file into Documents, in file order.

    Each line is an object with ``doc_id``, ``text`` and optional ``source``.
    Blank lines are skipped. Raises :class:`MalformedRecord` with the
    offending line number, or :class:`DuplicateId` on a repeated doc_id.
    """
    documents: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_number, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise MalformedRecord(line_number, "record is not an object")
            doc_id = record.get("doc_id")
            text = record.get("text")
            if not isinstance(doc_id, str) or not doc_id:
                raise MalformedRecord(line_number, "missing or empty doc_id")
            if not isinstance(text, str) or not text.strip():
                raise MalformedRecord(line_number, "missing or blank text")
            if doc_id in seen:
                raise DuplicateId(doc_id)
            seen.add(doc_id)
            source = record.get("source")
            if source is not None and not isinstance(source, str):
                raise MalformedRecord(line_number, "source must be a string or null")
            documents.append(Document(doc_id=doc_id, text=text, source=source))
    return documents


def write_chunks(chunks: Iterable[Chunk], path: str | Path) -> int:
    """Write chunks as JSON Lines; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for chunk in chunks:
            record = {
                "chunk_id": chunk.chunk_id,
                "doc_id": chunk.doc_id,
                "text": chunk.text,
                "token_count": chunk.token_count,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_chunks(path: str | Path) -> list[Chunk]:
    """Read a chunk file written by :func:`write_chunks`."""
    chunks: list[Chunk] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_number, f"invalid JSON: {exc.msg}") from exc
            try:
                chunk = Chunk(
                    chunk_id=record["chunk_id"],
                    doc_id=record["doc_id"],
                    text=record["text"],
                    token_count=int(record["token_count"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(line_number, f"bad chunk record: {exc}") from exc
            if chunk.chunk_id in seen:
                raise DuplicateId(chunk.chunk_id)
            seen.add(chunk.chunk_id)
            chunks.append(chunk)
    return chunks
