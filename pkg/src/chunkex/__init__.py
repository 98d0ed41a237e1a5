"""chunkex: chunk-knowledge document expansion, retrieval, and evaluation.

Chunks are enriched with a generated title and three candidate questions,
composed into passage strings under seven fixed orderings, embedded with
``passage:``/``query:`` role prefixes, and served from an exact cosine
index. The evaluation layer scores retrieval with Top@k pass rates,
greedy-matching embedding scores, and LLM-judge verdicts.
"""

from . import evaluation
from .compose import CASE_SPECS, CaseSpec, ComposedPassage, compose_passage, compose_query, split_passage
from .corpus import (
    Chunk,
    ChunkingResult,
    Document,
    DroppedUnit,
    TokenCounter,
    WHITESPACE_COUNTER,
    chunk_document,
    chunk_documents,
    load_corpus,
    read_chunks,
    write_chunks,
)
from .embed import HashingEmbedder, HttpEmbedder, cosine, embed_passage, embed_query, embed_texts, normalize
from .index import IndexedPassage, SearchHit, VectorIndex, make_point_id
from .keyword import (
    BioLabel,
    GazetteerTagger,
    HttpTagger,
    KeywordSpan,
    decode_bio,
    encode_bio,
    extract_keywords,
    tokenize_query,
)
from .knowledge import (
    ChunkKnowledge,
    GenerationResult,
    HttpGenerator,
    MockGenerator,
    generate_knowledge,
    mock_generate,
    read_knowledge,
    write_knowledge,
)
from .pipeline import build_case_index
from .retriever import ChunkKnowledgeRetriever

__version__ = "0.1.0"

__all__ = [
    "BioLabel",
    "CASE_SPECS",
    "CaseSpec",
    "Chunk",
    "ChunkKnowledge",
    "ChunkKnowledgeRetriever",
    "ChunkingResult",
    "ComposedPassage",
    "Document",
    "DroppedUnit",
    "GazetteerTagger",
    "GenerationResult",
    "HashingEmbedder",
    "HttpEmbedder",
    "HttpGenerator",
    "HttpTagger",
    "IndexedPassage",
    "KeywordSpan",
    "MockGenerator",
    "SearchHit",
    "TokenCounter",
    "VectorIndex",
    "WHITESPACE_COUNTER",
    "build_case_index",
    "chunk_document",
    "chunk_documents",
    "compose_passage",
    "compose_query",
    "cosine",
    "decode_bio",
    "embed_passage",
    "embed_query",
    "embed_texts",
    "encode_bio",
    "evaluation",
    "extract_keywords",
    "generate_knowledge",
    "load_corpus",
    "make_point_id",
    "mock_generate",
    "normalize",
    "read_chunks",
    "read_knowledge",
    "split_passage",
    "tokenize_query",
    "write_chunks",
    "write_knowledge",
]
