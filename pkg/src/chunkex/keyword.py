"""Keyword spans decoded from BIO labels over tokenized queries.

Labels are the three-class scheme KB (keyword begin), KI (keyword inside)
and O (outside). The trained token classifier is an external service; tests
and offline runs use the deterministic longest-match gazetteer tagger.
Remote wire contract:

    POST <endpoint>   {"tokens": ["solar", "panel", "cost"]}
    response          {"labels": ["KB", "KI", "O"]}

with ``labels`` the same length as ``tokens``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Protocol, Sequence

import httpx

from .errors import EmptyQuery, LengthMismatch, MalformedBackendOutput
from .remote import post_json

# Word runs, or single non-space punctuation characters.
_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


class BioLabel(Enum):
    KB = "KB"
    KI = "KI"
    O = "O"


@dataclass(frozen=True)
class KeywordSpan:
    """A contiguous keyword over token indices [start, end)."""

    start: int
    end: int
    text: str


class TaggerBackend(Protocol):
    name: str

    def tag(self, tokens: Sequence[str]) -> list[BioLabel]: ...


Segmenter = Callable[[str], list[str]]


def tokenize_query(query: str) -> list[str]:
    """Split on whitespace and punctuation boundaries; punctuation marks
    become their own tokens. A morphological analyzer can be plugged in via
    the ``segmenter`` argument of :func:`extract_keywords` instead."""
    if not query.strip():
        raise EmptyQuery("query must be non-empty")
    return _TOKEN_RE.findall(query)


def decode_bio(tokens: Sequence[str], labels: Sequence[BioLabel]) -> list[KeywordSpan]:
    """Decode label runs ``KB KI*`` into spans.

    An orphan KI (at sequence start or right after O) is repaired to KB and
    opens a new span, which preserves recall when the tagger emits a
    truncated run. Span text joins the covered tokens with single spaces.
    """
    if len(tokens) != len(labels):
        raise LengthMismatch(f"{len(tokens)} tokens vs {len(labels)} labels")
    spans: list[KeywordSpan] = []
    start: int | None = None

    def close(end: int) -> None:
        spans.append(KeywordSpan(start, end, " ".join(tokens[start:end])))

    for i, label in enumerate(labels):
        if label is BioLabel.O:
            if start is not None:
                close(i)
            start = None
        elif label is BioLabel.KB:
            if start is not None:
                close(i)
            start = i
        else:  # KI continues a span, or opens one when orphaned
            if start is None:
                start = i
    if start is not None:
        close(len(labels))
    return spans


def encode_bio(spans: Sequence[KeywordSpan], token_count: int) -> list[BioLabel]:
    """Inverse of :func:`decode_bio` for well-formed span lists."""
    labels = [BioLabel.O] * token_count
    previous_end = 0
    for span in spans:
        if not (0 <= span.start < span.end <= token_count):
            raise ValueError(f"span ({span.start}, {span.end}) out of range")
        if span.start < previous_end:
            raise ValueError("spans must be sorted and non-overlapping")
        labels[span.start] = BioLabel.KB
        for i in range(span.start + 1, span.end):
            labels[i] = BioLabel.KI
        previous_end = span.end
    return labels


def extract_keywords(
    query: str,
    backend: TaggerBackend,
    segmenter: Segmenter | None = None,
) -> list[KeywordSpan]:
    """Tokenize ``query``, tag it, and decode the labels into spans."""
    tokens = (segmenter or tokenize_query)(query)
    labels = backend.tag(tokens)
    return decode_bio(tokens, labels)


class GazetteerTagger:
    """Deterministic reference tagger: longest case-insensitive phrase match.

    Phrases are tokenized with the same query tokenizer; scanning is left to
    right, preferring the longest phrase starting at each position.
    """

    name = "gazetteer"

    def __init__(self, phrases: Sequence[str]):
        self._phrases: list[tuple[str, ...]] = []
        for phrase in phrases:
            if phrase.strip():
                self._phrases.append(tuple(t.casefold() for t in tokenize_query(phrase)))
        self._phrases.sort(key=len, reverse=True)

    def tag(self, tokens: Sequence[str]) -> list[BioLabel]:
        folded = [t.casefold() for t in tokens]
        labels = [BioLabel.O] * len(tokens)
        i = 0
        while i < len(tokens):
            matched = 0
            for phrase in self._phrases:
                if tuple(folded[i : i + len(phrase)]) == phrase:
                    matched = len(phrase)
                    break
            if matched:
                labels[i] = BioLabel.KB
                for j in range(i + 1, i + matched):
                    labels[j] = BioLabel.KI
                i += matched
            else:
                i += 1
        return labels


class HttpTagger:
    """Client for a remote token classifier (wire contract in module docstring)."""

    name = "remote-tagger"

    def __init__(
        self,
        endpoint: str,
        client: httpx.Client | None = None,
        retries: int = 2,
        backoff: float = 0.25,
    ):
        self.endpoint = endpoint
        self.retries = retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=30.0)

    def tag(self, tokens: Sequence[str]) -> list[BioLabel]:
        data = post_json(
            self._client,
            self.endpoint,
            {"tokens": list(tokens)},
            retries=self.retries,
            backoff=self.backoff,
        )
        raw = data.get("labels")
        if not isinstance(raw, list):
            raise MalformedBackendOutput(None, "missing labels list")
        if len(raw) != len(tokens):
            raise LengthMismatch(f"{len(tokens)} tokens vs {len(raw)} labels")
        try:
            return [BioLabel(value) for value in raw]
        except ValueError as exc:
            raise MalformedBackendOutput(None, f"unknown label in {raw!r:.80}") from exc
