from __future__ import annotations

import numpy as np
import pytest

from chunkex import Chunk, ChunkKnowledge, Document


@pytest.fixture
def sample_documents() -> list[Document]:
    return [
        Document(
            doc_id="solar",
            text=(
                "Solar panels convert sunlight into electricity.\n"
                "Output varies by season.\n\n"
                "They are installed on rooftops and in fields."
            ),
            source="energy-notes",
        ),
        Document(
            doc_id="wind",
            text="Wind turbines capture kinetic energy.\n\nBlade length drives output.",
        ),
    ]


@pytest.fixture
def sample_chunk() -> Chunk:
    return Chunk(
        chunk_id="solar#0",
        doc_id="solar",
        text="Solar panels convert sunlight into electricity.\nOutput varies by season.",
        token_count=10,
    )


@pytest.fixture
def sample_knowledge() -> ChunkKnowledge:
    return ChunkKnowledge(
        chunk_id="solar#0",
        title="Rooftop solar power",
        questions=(
            "How do panels convert sunlight?",
            "Where are solar panels installed?",
            "Why does output vary by season?",
        ),
    )


class RecordingEmbedder:
    """Deterministic test backend that records every text it receives."""

    name = "recording"

    def __init__(self, dim: int = 8, max_batch: int = 64):
        self.dim = dim
        self.max_batch = max_batch
        self.seen: list[str] = []

    def embed(self, texts):
        self.seen.extend(texts)
        vectors = []
        for text in texts:
            seed = sum(ord(ch) * (i + 1) for i, ch in enumerate(text)) % (2**32)
            rng = np.random.default_rng(seed)
            vectors.append(rng.normal(size=self.dim))
        return vectors


@pytest.fixture
def recording_embedder() -> RecordingEmbedder:
    return RecordingEmbedder()
