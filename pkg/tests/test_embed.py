from __future__ import annotations

import json
import math

import httpx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from chunkex import HashingEmbedder, HttpEmbedder, cosine, embed_passage, embed_query, embed_texts
from chunkex.errors import DimensionMismatch, DoublePrefix, EmptyQuery, MalformedBackendOutput


def hash_oracle(text: str, dim: int) -> list[float]:
    """Recipe spelled out step by step: accumulate character 3-grams into
    hashed buckets with a sign bit from a second hash, then L2-normalize."""
    buckets = [0.0] * dim
    grams = [text[i : i + 3] for i in range(len(text) - 2)] if len(text) >= 3 else [text]
    for gram in grams:
        h1 = 0
        h2 = 0
        for ch in gram:
            h1 = (h1 * 31 + ord(ch)) % (2**64)
            h2 = (h2 * 131 + ord(ch)) % (2**64)
        buckets[h1 % dim] += 1.0 if h2 % 2 == 0 else -1.0
    if all(b == 0.0 for b in buckets):
        buckets[0] = 1.0
    norm = math.sqrt(sum(b * b for b in buckets))
    return [b / norm for b in buckets]


def test_hashing_embedder_matches_oracle():
    embedder = HashingEmbedder(dim=64)
    for text in ("abc", "passage: <s> solar </s>", "query: 솔라 패널", "ab"):
        got = embedder.embed([text])[0]
        assert np.allclose(got, hash_oracle(text, 64), atol=0)


def test_vectors_are_unit_norm():
    embedder = HashingEmbedder(dim=128)
    for text in ("a", "some longer text with words", "passage: <s> x </s>"):
        vec = embed_passage(text, embedder)
        assert abs(np.linalg.norm(vec) - 1.0) <= 1e-6


def test_hashing_embedder_deterministic():
    embedder = HashingEmbedder(dim=64)
    a = embedder.embed(["deterministic text"])[0]
    b = embedder.embed(["deterministic text"])[0]
    assert np.array_equal(a, b)


def test_query_prefix_reaches_backend_exactly(recording_embedder):
    embed_query("솔라 패널", recording_embedder)
    assert recording_embedder.seen == ["query: 솔라 패널"]


def test_passage_text_passed_through_unchanged(recording_embedder):
    embed_passage("passage: <s> solar </s>", recording_embedder)
    assert recording_embedder.seen == ["passage: <s> solar </s>"]


def test_empty_query_rejected(recording_embedder):
    with pytest.raises(EmptyQuery):
        embed_query("  ", recording_embedder)


def test_double_prefix_rejected(recording_embedder):
    with pytest.raises(DoublePrefix):
        embed_query("query: already prefixed", recording_embedder)
    with pytest.raises(DoublePrefix):
        embed_passage("passage: passage: <s> x </s>", recording_embedder)


def test_role_prefixes_change_hashing_vectors():
    embedder = HashingEmbedder(dim=64)
    text = "solar panel"
    query_vec = embed_query(text, embedder)
    passage_vec = embed_passage(text, embedder)  # unprefixed passage text
    assert not np.allclose(query_vec, passage_vec)


def test_cosine_identity_and_orthogonal():
    v = np.array([0.3, -0.4, 0.5])
    assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)
    assert cosine([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0, abs=1e-12)


def test_cosine_hand_example():
    assert cosine([0.6, 0.8], [1.0, 0.0]) == pytest.approx(0.6, abs=1e-12)


def test_cosine_symmetry_exact():
    rng = np.random.default_rng(7)
    for _ in range(25):
        u = rng.normal(size=16)
        v = rng.normal(size=16)
        assert cosine(u, v) == cosine(v, u)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_cosine_scale_invariance(alpha):
    u = np.array([0.2, -0.7, 0.1, 0.5])
    v = np.array([-0.3, 0.4, 0.9, -0.2])
    assert cosine(alpha * u, v) == pytest.approx(cosine(u, v), abs=1e-9)


def test_cosine_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        cosine([1.0, 0.0], [1.0, 0.0, 0.0])


def test_cosine_stays_in_range():
    u = np.full(8, 1e-3)
    assert -1.0 <= cosine(u, u) <= 1.0


def test_batching_invariance_for_hashing_embedder():
    embedder = HashingEmbedder(dim=64)
    texts = [f"passage: <s> text number {i} </s>" for i in range(40)]
    one_by_one = [embedder.embed([t])[0] for t in texts]
    batched = embed_texts(texts, embedder, batch=16)
    for a, b in zip(one_by_one, batched):
        assert np.array_equal(a / np.linalg.norm(a), b)


def test_embed_texts_normalizes_backend_output(recording_embedder):
    vectors = embed_texts(["a", "b", "c"], recording_embedder, batch=2)
    for vec in vectors:
        assert abs(np.linalg.norm(vec) - 1.0) <= 1e-9


# --- remote wire contract ------------------------------------------------------


def wire_embedder(handler, dim=4) -> HttpEmbedder:
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return HttpEmbedder("http://emb.test/embed", dim=dim, client=client, backoff=0.0)


def test_http_embedder_round_trip():
    seen = []

    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        seen.append(body)
        return httpx.Response(
            200, json={"vectors": [[1.0, 0.0, 0.0, 0.0] for _ in body["texts"]]}
        )

    backend = wire_embedder(handler)
    vec = embed_passage("passage: <s> x </s>", backend)
    assert seen == [{"texts": ["passage: <s> x </s>"]}]
    assert np.allclose(vec, [1.0, 0.0, 0.0, 0.0])


def test_http_embedder_dim_mismatch():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={"vectors": [[1.0, 0.0]]})

    with pytest.raises(DimensionMismatch):
        wire_embedder(handler, dim=4).embed(["x"])


def test_http_embedder_wrong_count():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={"vectors": []})

    with pytest.raises(MalformedBackendOutput):
        wire_embedder(handler).embed(["x"])


def test_http_embedder_check_probes_endpoint():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={"vectors": [[1.0, 0.0]]})

    with pytest.raises(DimensionMismatch):
        wire_embedder(handler, dim=4).check()
