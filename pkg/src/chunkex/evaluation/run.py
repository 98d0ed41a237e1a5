"""End-to-end retrieval evaluation over built indexes.

For every case and query: embed the prefixed query once, search the case's
collection once at the largest k, then derive every Top@k verdict from
prefixes of that single ranked list. Relevance comes either from gold
labels (offline, deterministic) or from the retrieval judge, whose verdicts
are cached by (query_id, chunk_id) so no chunk is judged twice for a query
even across cases.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..embed import EmbeddingBackend, embed_query
from ..errors import ChunkexError, DuplicateId, EmptyQuerySet, MalformedRecord
from ..index import VectorIndex
from ..validation import check_k_values
from .judge import FAIL, PASS, JudgeClient, Judgment
from .metrics import TOP_K_DEFAULT, EvalReport, pass_rate_table, top_k_pass

GOLD_MODE = "gold"
JUDGE_MODE = "llm-judge"


@dataclass(frozen=True)
class GoldQuery:
    """One evaluation query with its labeled relevant chunks."""

    query_id: str
    text: str
    relevant_chunk_ids: frozenset[str]

    def __post_init__(self) -> None:
        if not self.query_id:
            raise ValueError("query_id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"{self.query_id}: query text must be non-empty")
        if not self.relevant_chunk_ids:
            raise ValueError(f"{self.query_id}: relevant_chunk_ids must be non-empty")


def read_gold(path: str | Path) -> list[GoldQuery]:
    """Read gold label records {query_id, query, relevant_chunk_ids}."""
    queries: list[GoldQuery] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                query = GoldQuery(
                    query_id=record["query_id"],
                    text=record["query"],
                    relevant_chunk_ids=frozenset(record["relevant_chunk_ids"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(line_number, f"bad gold record: {exc}") from exc
            if query.query_id in seen:
                raise DuplicateId(query.query_id)
            seen.add(query.query_id)
            queries.append(query)
    return queries


def check_gold_resolves(queries: Iterable[GoldQuery], chunk_ids: Iterable[str]) -> None:
    """Every labeled relevant id must exist in the chunk corpus."""
    known = set(chunk_ids)
    unknown = sorted(
        cid for q in queries for cid in q.relevant_chunk_ids if cid not in known
    )
    if unknown:
        raise ValueError(f"gold labels reference unknown chunk ids: {unknown[:10]}")


@dataclass
class EvaluationRun:
    report: EvalReport
    judgments: list[Judgment] = field(default_factory=list)


class _JudgmentCache:
    """(query_id, chunk_id) -> Judgment; safe under concurrent insertion."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._items: dict[tuple[str, str], Judgment] = {}

    def get(self, key: tuple[str, str]) -> Judgment | None:
        with self._lock:
            return self._items.get(key)

    def put(self, key: tuple[str, str], judgment: Judgment) -> None:
        with self._lock:
            self._items.setdefault(key, judgment)

    def values(self) -> list[Judgment]:
        with self._lock:
            return list(self._items.values())


def _judge_pair(
    judge: JudgeClient, query: GoldQuery, chunk_id: str, chunk_text: str
) -> tuple[Judgment, bool]:
    """Returns (judgment, errored)."""
    try:
        verdict = judge.judge_retrieval(query.text, chunk_text)
        rationale = "judge verdict"
        errored = False
    except ChunkexError as exc:
        verdict = FAIL
        rationale = f"judge-error: {exc}"
        errored = True
    return (
        Judgment(
            query_id=query.query_id,
            chunk_id=chunk_id,
            verdict=verdict,
            rationale=rationale,
            source=JUDGE_MODE,
        ),
        errored,
    )


def run_evaluation(
    indexes: Mapping[int, VectorIndex],
    queries: Sequence[GoldQuery],
    embedder: EmbeddingBackend,
    *,
    k_values: Sequence[int] = TOP_K_DEFAULT,
    mode: str = GOLD_MODE,
    judge: JudgeClient | None = None,
    chunk_texts: Mapping[str, str] | None = None,
    max_in_flight: int = 1,
) -> EvaluationRun:
    """Evaluate every case in ``indexes`` over ``queries``.

    Judge mode needs ``judge`` and ``chunk_texts`` (the prompt quotes the
    chunk). A judge call that fails after retries counts as a fail verdict
    with a ``judge-error`` rationale and is tallied on the report rather
    than aborting the run.
    """
    ks = check_k_values(k_values)
    if not queries:
        raise EmptyQuerySet("no evaluation queries")
    if not indexes:
        raise ValueError("no case indexes given")
    if mode not in (GOLD_MODE, JUDGE_MODE):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == JUDGE_MODE:
        if judge is None:
            raise ValueError("judge mode needs a JudgeClient")
        if chunk_texts is None:
            raise ValueError("judge mode needs chunk_texts to quote in prompts")

    k_max = max(ks)
    query_vectors = {q.query_id: embed_query(q.text, embedder) for q in queries}

    # case_id -> query_id -> ranked chunk ids from one search at k_max
    ranked: dict[int, dict[str, list[str]]] = {}
    for case_id, index in indexes.items():
        per_query: dict[str, list[str]] = {}
        for q in queries:
            hits = index.search(query_vectors[q.query_id], k_max)
            per_query[q.query_id] = [
                hit.payload.get("chunk_id", hit.point_id.rsplit(":", 1)[0])
                for hit in hits
            ]
        ranked[case_id] = per_query

    cache = _JudgmentCache()
    judge_errors = 0
    if mode == JUDGE_MODE:
        pending: list[tuple[GoldQuery, str]] = []
        scheduled: set[tuple[str, str]] = set()
        for per_query in ranked.values():
            for q in queries:
                for chunk_id in per_query[q.query_id]:
                    key = (q.query_id, chunk_id)
                    if key not in scheduled:
                        scheduled.add(key)
                        pending.append((q, chunk_id))

        def work(item: tuple[GoldQuery, str]) -> bool:
            q, chunk_id = item
            judgment, errored = _judge_pair(
                judge, q, chunk_id, chunk_texts.get(chunk_id, "")
            )
            cache.put((q.query_id, chunk_id), judgment)
            return errored

        if max_in_flight > 1 and len(pending) > 1:
            with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
                judge_errors = sum(pool.map(work, pending))
        else:
            judge_errors = sum(work(item) for item in pending)

    results: dict[int, dict[int, list[bool]]] = {}
    for case_id, per_query in ranked.items():
        results[case_id] = {k: [] for k in ks}
        for q in queries:
            hits = per_query[q.query_id]
            if mode == GOLD_MODE:
                relevant = q.relevant_chunk_ids
            else:
                relevant = lambda cid, qid=q.query_id: (
                    (j := cache.get((qid, cid))) is not None and j.verdict == PASS
                )
            for k in ks:
                results[case_id][k].append(top_k_pass(hits, relevant, k))

    report = pass_rate_table(results, judge_errors=judge_errors)
    return EvaluationRun(report=report, judgments=cache.values())


def write_judgments(judgments: Iterable[Judgment], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for j in judgments:
            record = {
                "query_id": j.query_id,
                "chunk_id": j.chunk_id,
                "verdict": j.verdict,
                "rationale": j.rationale,
                "source": j.source,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count
