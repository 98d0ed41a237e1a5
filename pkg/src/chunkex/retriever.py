"""sklearn-style facade over the full expansion-and-retrieval pipeline.

``fit`` chunks the documents, generates chunk knowledge when the case needs
it, composes passages, embeds them, and builds the exact cosine index;
``search`` ranks chunks for one raw query and ``predict`` returns the top
chunk id per query. Construction parameters follow sklearn conventions
(stored verbatim, validated in ``fit``), so the retriever works with
``get_params``/``set_params``, ``clone``, and grid search over ``case_id``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .compose import get_case
from .corpus import Document, TokenCounter, WHITESPACE_COUNTER, chunk_documents
from .embed import EmbeddingBackend, HashingEmbedder, embed_query
from .index import SearchHit
from .knowledge import GeneratorBackend, MockGenerator, generate_knowledge
from .pipeline import build_case_index


def _coerce_documents(X: Iterable) -> list[Document]:
    documents: list[Document] = []
    for i, item in enumerate(X):
        if isinstance(item, Document):
            documents.append(item)
        elif isinstance(item, dict):
            documents.append(
                Document(
                    doc_id=item["doc_id"], text=item["text"], source=item.get("source")
                )
            )
        elif isinstance(item, str):
            documents.append(Document(doc_id=f"doc-{i:04d}", text=item))
        else:
            raise TypeError(
                f"documents must be Document, dict, or str; got {type(item).__name__}"
            )
    return documents


class ChunkKnowledgeRetriever(BaseEstimator):
    """Retriever that indexes knowledge-expanded document chunks.

    Parameters
    ----------
    case_id : which passage composition to index (1..7; 6 puts the three
        candidate questions ahead of the chunk text, the strongest default).
    k : default number of hits returned by ``search``.
    budget : token budget per chunk.
    dim : embedding dimension for the default hashing embedder.
    generator : knowledge backend; defaults to the deterministic mock.
    embedder : embedding backend; defaults to the hashing embedder.
    token_counter : chunking token counter; defaults to whitespace counting.
    batch_size : backend batch size for generation and embedding.
    question_separator : joiner between the three questions in a passage.
    """

    def __init__(
        self,
        case_id: int = 6,
        k: int = 10,
        budget: int = 512,
        dim: int = 256,
        generator: GeneratorBackend | None = None,
        embedder: EmbeddingBackend | None = None,
        token_counter: TokenCounter | None = None,
        batch_size: int = 16,
        question_separator: str = " ",
    ):
        self.case_id = case_id
        self.k = k
        self.budget = budget
        self.dim = dim
        self.generator = generator
        self.embedder = embedder
        self.token_counter = token_counter
        self.batch_size = batch_size
        self.question_separator = question_separator

    def fit(self, X: Iterable, y=None) -> "ChunkKnowledgeRetriever":
        """Build the case index from documents (Document, dict, or str)."""
        spec = get_case(self.case_id)
        documents = _coerce_documents(X)
        counter = self.token_counter or WHITESPACE_COUNTER
        embedder = self.embedder or HashingEmbedder(dim=self.dim)

        result = chunk_documents(documents, budget=self.budget, counter=counter)
        if not result.chunks:
            raise ValueError("no chunks survived the token budget; nothing to index")

        knowledge_map = None
        if spec.needs_knowledge:
            backend = self.generator or MockGenerator(max_batch=self.batch_size)
            generated = generate_knowledge(
                result.chunks, backend, batch=min(self.batch_size, backend.max_batch)
            ).require_complete()
            knowledge_map = {item.chunk_id: item for item in generated}

        self.index_ = build_case_index(
            spec,
            result.chunks,
            knowledge_map,
            embedder,
            batch=self.batch_size,
            question_separator=self.question_separator,
        )
        self.embedder_ = embedder
        self.chunks_ = result.chunks
        self.dropped_ = result.dropped
        self.knowledge_ = knowledge_map or {}
        self.n_chunks_ = len(result.chunks)
        return self

    def _require_fitted(self) -> None:
        if not hasattr(self, "index_"):
            raise NotFittedError(
                "This ChunkKnowledgeRetriever is not fitted yet; call fit first."
            )

    def search(self, query: str, k: int | None = None) -> list[SearchHit]:
        """Ranked hits for one raw (unprefixed) query."""
        self._require_fitted()
        vector = embed_query(query, self.embedder_)
        return self.index_.search(vector, k or self.k)

    def predict(self, X: str | Sequence[str]) -> list[str]:
        """Top-1 chunk id for each query."""
        queries = [X] if isinstance(X, str) else list(X)
        return [self.search(query, k=1)[0].payload["chunk_id"] for query in queries]
