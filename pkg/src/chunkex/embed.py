"""Unit-norm embeddings for passages and queries via pluggable backends.

Passages arrive already carrying the ``passage: `` role prefix (the composer
applies it); queries get their ``query: `` prefix here because they bypass
the composer. Every vector is L2-normalized in this module regardless of
what the backend claims, so a plain dot product is a valid cosine everywhere
downstream. Remote wire contract:

    POST <endpoint>   {"texts": ["passage: <s> ... </s>", ...]}
    response          {"vectors": [[0.12, -0.03, ...], ...]}

with every vector of the configured dimension.
"""

from __future__ import annotations

from typing import Protocol, Sequence

import httpx
import numpy as np

from .compose import QUERY_PREFIX, compose_query
from .errors import DimensionMismatch, DoublePrefix, EmptyQuery, MalformedBackendOutput
from .remote import iter_batches, post_json, run_batches
from .validation import check_vector

_MASK64 = (1 << 64) - 1


class EmbeddingBackend(Protocol):
    name: str
    dim: int
    max_batch: int

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


def normalize(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return the L2-normalized copy of ``values``."""
    vec = check_vector(values)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return vec / norm


def cosine(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding."""
    u = check_vector(u)
    v = check_vector(v)
    if u.shape[0] != v.shape[0]:
        raise DimensionMismatch(u.shape[0], v.shape[0])
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine is undefined for zero vectors")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def embed_passage(text: str, backend: EmbeddingBackend) -> np.ndarray:
    """Embed one composed passage string exactly as given."""
    if not text.strip():
        raise ValueError("passage text must be non-empty")
    if text.startswith("passage: passage:"):
        raise DoublePrefix("passage prefix applied twice")
    return normalize(backend.embed([text])[0])


def embed_query(query_text: str, backend: EmbeddingBackend) -> np.ndarray:
    """Prefix ``query_text`` with ``query: `` and embed it."""
    if not query_text.strip():
        raise EmptyQuery("query must be non-empty")
    if query_text.strip().startswith(QUERY_PREFIX):
        raise DoublePrefix("query prefix applied twice")
    return normalize(backend.embed([compose_query(query_text)])[0])


def embed_texts(
    texts: Sequence[str],
    backend: EmbeddingBackend,
    batch: int | None = None,
    max_in_flight: int = 1,
) -> list[np.ndarray]:
    """Embed many already-prefixed texts in batches, preserving order."""
    if not texts:
        return []
    size = min(batch or backend.max_batch, backend.max_batch)
    results = run_batches(
        iter_batches(list(texts), size),
        lambda chunk_texts: backend.embed(chunk_texts),
        max_in_flight=max_in_flight,
    )
    return [normalize(vec) for vectors in results for vec in vectors]


def _hash_pair(gram: str) -> tuple[int, int]:
    h1 = 0
    h2 = 0
    for ch in gram:
        h1 = (h1 * 31 + ord(ch)) & _MASK64
        h2 = (h2 * 131 + ord(ch)) & _MASK64
    return h1, h2


class HashingEmbedder:
    """Deterministic character 3-gram feature-hashing embedder.

    Each 3-gram lands in bucket ``h1 % dim`` with sign taken from the low
    bit of an independent hash ``h2``; the accumulated vector is then
    L2-normalized. Texts shorter than three characters hash as a single
    gram. Shared substrings produce shared buckets, so similarity structure
    is non-trivial and platform-independent, which makes end-to-end
    retrieval tests meaningful offline.
    """

    name = "hash3gram"

    def __init__(self, dim: int = 256, max_batch: int = 1024):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = dim
        self.max_batch = max_batch

    def _embed_one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        grams = (
            [text[i : i + 3] for i in range(len(text) - 2)] if len(text) >= 3 else [text]
        )
        for gram in grams:
            h1, h2 = _hash_pair(gram)
            vec[h1 % self.dim] += 1.0 if (h2 & 1) == 0 else -1.0
        if not vec.any():  # signed collisions can cancel exactly
            vec[0] = 1.0
        return vec / np.linalg.norm(vec)

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self._embed_one(text) for text in texts]


class HttpEmbedder:
    """Client for a remote embedding service (wire contract in module docstring)."""

    name = "remote-embedder"

    def __init__(
        self,
        endpoint: str,
        dim: int = 1024,
        max_batch: int = 16,
        client: httpx.Client | None = None,
        retries: int = 2,
        backoff: float = 0.25,
    ):
        self.endpoint = endpoint
        self.dim = dim
        self.max_batch = max_batch
        self.retries = retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=30.0)

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        data = post_json(
            self._client,
            self.endpoint,
            {"texts": list(texts)},
            retries=self.retries,
            backoff=self.backoff,
        )
        vectors = data.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise MalformedBackendOutput(
                None, f"expected {len(texts)} vectors, got {type(vectors).__name__}"
            )
        out: list[np.ndarray] = []
        for values in vectors:
            vec = check_vector(values)
            if vec.shape[0] != self.dim:
                raise DimensionMismatch(self.dim, vec.shape[0])
            out.append(vec)
        return out

    def check(self) -> None:
        """Probe the endpoint once; raises on unreachable or wrong-dim service."""
        self.embed(["ping"])
