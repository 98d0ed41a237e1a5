"""Exact-cosine vector index with payloads and snapshot persistence.

The index is an exact scan, not ANN: corpora in the tens of thousands of
passages need no approximation, and exactness makes search results their
own oracle. Readers never block: search reads an immutable state snapshot,
while writers serialize on a lock and swap the state atomically, so a
search never observes a partially applied upsert batch.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CorruptSnapshot, DimensionMismatch
from .validation import check_positive_int, check_vector

_MAGIC = "chunkex-index v1"


def make_point_id(chunk_id: str, case_id: int) -> str:
    return f"{chunk_id}:{case_id}"


@dataclass(frozen=True, eq=False)
class IndexedPassage:
    """One stored point: composed-passage vector plus identifying payload."""

    point_id: str
    vector: np.ndarray
    payload: dict


@dataclass(frozen=True)
class SearchHit:
    point_id: str
    score: float
    payload: dict = field(compare=False)


@dataclass(frozen=True)
class _State:
    """Immutable search snapshot: ids, unit-norm matrix, payloads."""

    ids: tuple[str, ...]
    matrix: np.ndarray
    payloads: tuple[dict, ...]


_EMPTY = _State(ids=(), matrix=np.zeros((0, 0)), payloads=())


class VectorIndex:
    """One named collection of same-dimension points under cosine metric."""

    metric = "cosine"

    def __init__(self, name: str, dim: int):
        if not name:
            raise ValueError("collection name must be non-empty")
        check_positive_int(dim, "dim")
        self.name = name
        self.dim = dim
        self._points: dict[str, tuple[np.ndarray, dict]] = {}
        self._write_lock = threading.Lock()
        self._state: _State = _EMPTY

    def __len__(self) -> int:
        return len(self._state.ids)

    def __contains__(self, point_id: str) -> bool:
        return point_id in self._points

    def upsert(self, points: Iterable[IndexedPassage]) -> int:
        """Insert or replace points by id; returns the number applied."""
        staged: list[IndexedPassage] = []
        for point in points:
            vec = check_vector(point.vector)
            if vec.shape[0] != self.dim:
                raise DimensionMismatch(self.dim, vec.shape[0])
            staged.append(IndexedPassage(point.point_id, vec, dict(point.payload)))
        if not staged:
            return 0
        with self._write_lock:
            for point in staged:
                self._points[point.point_id] = (point.vector, point.payload)
            ids = tuple(self._points)
            matrix = np.stack([self._points[i][0] for i in ids])
            norms = np.linalg.norm(matrix, axis=1, keepdims=True)
            if np.any(norms == 0.0):
                raise ValueError("zero vector cannot be indexed under cosine")
            payloads = tuple(self._points[i][1] for i in ids)
            self._state = _State(ids=ids, matrix=matrix / norms, payloads=payloads)
        return len(staged)

    def search(self, query_vector: Sequence[float] | np.ndarray, k: int) -> list[SearchHit]:
        """Exact top-k by cosine, sorted descending, ties by point_id ascending.

        An empty collection yields an empty list; ``k`` larger than the
        collection returns everything, still sorted.
        """
        check_positive_int(k, "k")
        query = check_vector(query_vector)
        if query.shape[0] != self.dim:
            raise DimensionMismatch(self.dim, query.shape[0])
        state = self._state
        if not state.ids:
            return []
        norm = float(np.linalg.norm(query))
        if norm == 0.0:
            raise ValueError("cannot search with a zero vector")
        scores = state.matrix @ (query / norm)
        order = sorted(range(len(state.ids)), key=lambda i: (-scores[i], state.ids[i]))
        return [
            SearchHit(
                point_id=state.ids[i],
                score=float(np.clip(scores[i], -1.0, 1.0)),
                payload=dict(state.payloads[i]),
            )
            for i in order[:k]
        ]

    def points(self) -> list[IndexedPassage]:
        """All points in insertion order (vectors are copies)."""
        state = self._state
        return [
            IndexedPassage(point_id, self._points[point_id][0].copy(), dict(payload))
            for point_id, payload in zip(state.ids, state.payloads)
        ]

    def snapshot(self, path: str | Path) -> None:
        """Persist magic line, header, then one record per point."""
        state = self._state
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(_MAGIC + "\n")
            header = {
                "name": self.name,
                "dim": self.dim,
                "metric": self.metric,
                "count": len(state.ids),
            }
            handle.write(json.dumps(header, ensure_ascii=False) + "\n")
            for point_id in state.ids:
                vector, payload = self._points[point_id]
                record = {
                    "point_id": point_id,
                    "vector": vector.tolist(),
                    "payload": payload,
                }
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    @classmethod
    def restore(cls, path: str | Path) -> "VectorIndex":
        """Rebuild a collection from a snapshot; observationally identical."""
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
        if not lines or lines[0] != _MAGIC:
            raise CorruptSnapshot("missing or unknown magic line")
        if len(lines) < 2:
            raise CorruptSnapshot("missing header")
        try:
            header = json.loads(lines[1])
            name = header["name"]
            dim = header["dim"]
            metric = header["metric"]
            count = header["count"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CorruptSnapshot(f"bad header: {exc}") from exc
        if metric != cls.metric:
            raise CorruptSnapshot(f"unsupported metric {metric!r}")
        body = [line for line in lines[2:] if line.strip()]
        if len(body) != count:
            raise CorruptSnapshot(f"expected {count} points, found {len(body)}")
        index = cls(name=name, dim=dim)
        points: list[IndexedPassage] = []
        for offset, line in enumerate(body, start=3):
            try:
                record = json.loads(line)
                points.append(
                    IndexedPassage(
                        point_id=record["point_id"],
                        vector=np.asarray(record["vector"], dtype=np.float64),
                        payload=record["payload"],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorruptSnapshot(f"bad point record at line {offset}: {exc}") from exc
        try:
            index.upsert(points)
        except (DimensionMismatch, ValueError) as exc:
            raise CorruptSnapshot(str(exc)) from exc
        return index
