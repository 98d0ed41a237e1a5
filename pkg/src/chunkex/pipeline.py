"""Glue that turns chunks plus knowledge into a searchable case index."""

from __future__ import annotations

from typing import Mapping, Sequence

from .compose import CaseSpec, compose_passage, get_case
from .corpus import Chunk
from .embed import EmbeddingBackend, embed_texts
from .index import IndexedPassage, VectorIndex, make_point_id
from .knowledge import ChunkKnowledge


def build_case_index(
    case: CaseSpec | int,
    chunks: Sequence[Chunk],
    knowledge: Mapping[str, ChunkKnowledge] | None,
    embedder: EmbeddingBackend,
    *,
    batch: int | None = None,
    max_in_flight: int = 1,
    keywords: Mapping[str, Sequence[str]] | None = None,
    question_separator: str = " ",
    name: str | None = None,
) -> VectorIndex:
    """Compose, embed, and index every chunk under one composition case.

    ``knowledge`` maps chunk_id to its generated knowledge and is required
    whenever the case references titles or questions (MissingKnowledge
    otherwise). ``keywords`` optionally adds per-chunk keyword lists to the
    payloads; no search filter consumes them yet.
    """
    spec = get_case(case)
    passages = []
    for chunk in chunks:
        item = knowledge.get(chunk.chunk_id) if knowledge else None
        passages.append(
            compose_passage(spec, chunk, item, question_separator=question_separator)
        )
    vectors = embed_texts(
        [p.text for p in passages], embedder, batch=batch, max_in_flight=max_in_flight
    )

    points: list[IndexedPassage] = []
    for chunk, vector in zip(chunks, vectors):
        payload: dict = {
            "chunk_id": chunk.chunk_id,
            "doc_id": chunk.doc_id,
            "case_id": spec.case_id,
        }
        item = knowledge.get(chunk.chunk_id) if knowledge else None
        if item is not None:
            payload["title"] = item.title
            payload["questions"] = list(item.questions)
        if keywords and chunk.chunk_id in keywords:
            payload["keywords"] = list(keywords[chunk.chunk_id])
        points.append(
            IndexedPassage(
                point_id=make_point_id(chunk.chunk_id, spec.case_id),
                vector=vector,
                payload=payload,
            )
        )

    index = VectorIndex(name=name or f"case-{spec.case_id}", dim=embedder.dim)
    index.upsert(points)
    return index
