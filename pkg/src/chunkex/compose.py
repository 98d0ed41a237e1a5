"""Bit-exact passage composition for the seven indexing cases.

A composed passage is ``passage: <s> item </s> item </s> ... </s>`` where
each item is the chunk title, the three candidate questions (one item,
space-joined), or the chunk text. The seven fixed orderings determine what
goes into each vector collection; queries get a bare ``query: `` prefix with
no delimiters.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .corpus import Chunk
from .errors import EmptyQuery, MissingKnowledge
from .knowledge import ChunkKnowledge

PASSAGE_PREFIX = "passage: "
QUERY_PREFIX = "query: "
_OPEN = "<s>"
_CLOSE = "</s>"


class Item(Enum):
    TITLE = "title"
    QUESTIONS = "questions"
    CHUNK = "chunk"


@dataclass(frozen=True)
class CaseSpec:
    """One passage-composition case: an ordered selection of items."""

    case_id: int
    items: tuple[Item, ...]

    @property
    def needs_knowledge(self) -> bool:
        return Item.TITLE in self.items or Item.QUESTIONS in self.items


CASE_SPECS: dict[int, CaseSpec] = {
    1: CaseSpec(1, (Item.CHUNK,)),
    2: CaseSpec(2, (Item.TITLE,)),
    3: CaseSpec(3, (Item.QUESTIONS,)),
    4: CaseSpec(4, (Item.TITLE, Item.QUESTIONS, Item.CHUNK)),
    5: CaseSpec(5, (Item.QUESTIONS, Item.TITLE, Item.CHUNK)),
    6: CaseSpec(6, (Item.QUESTIONS, Item.CHUNK)),
    7: CaseSpec(7, (Item.TITLE, Item.CHUNK)),
}


@dataclass(frozen=True)
class ComposedPassage:
    chunk_id: str
    case_id: int
    text: str


def get_case(case: CaseSpec | int) -> CaseSpec:
    if isinstance(case, CaseSpec):
        return case
    try:
        return CASE_SPECS[case]
    except KeyError:
        raise ValueError(f"unknown case id {case!r}; valid ids are 1..7") from None


def _flatten(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n").replace("\n", " ")


def compose_passage(
    case: CaseSpec | int,
    chunk: Chunk,
    knowledge: ChunkKnowledge | None = None,
    question_separator: str = " ",
) -> ComposedPassage:
    """Build the exact passage string for ``case`` from chunk and knowledge.

    Raises :class:`MissingKnowledge` when the case references the title or
    questions and no knowledge is given. Items containing a literal
    ``</s>`` are rejected because they would break round-trip parsing.
    """
    spec = get_case(case)
    if spec.needs_knowledge and knowledge is None:
        raise MissingKnowledge(spec.case_id, chunk.chunk_id)

    rendered: list[str] = []
    for item in spec.items:
        if item is Item.TITLE:
            rendered.append(knowledge.title)
        elif item is Item.QUESTIONS:
            rendered.append(question_separator.join(knowledge.questions))
        else:
            rendered.append(_flatten(chunk.text))
    for text in rendered:
        if _CLOSE in text:
            raise ValueError(
                f"{chunk.chunk_id}: item contains literal {_CLOSE!r}; malformed knowledge"
            )

    body = f" {_CLOSE} ".join(rendered)
    return ComposedPassage(
        chunk_id=chunk.chunk_id,
        case_id=spec.case_id,
        text=f"{PASSAGE_PREFIX}{_OPEN} {body} {_CLOSE}",
    )


def compose_query(query_text: str) -> str:
    """Prefix a stripped query with ``query: ``; no wrapping delimiters."""
    stripped = query_text.strip()
    if not stripped:
        raise EmptyQuery("query must be non-empty")
    return QUERY_PREFIX + stripped


def split_passage(text: str) -> list[str]:
    """Recover the ordered item texts from a composed passage string."""
    head = f"{PASSAGE_PREFIX}{_OPEN} "
    tail = f" {_CLOSE}"
    if not text.startswith(head) or not text.endswith(tail):
        raise ValueError("not a composed passage")
    inner = text[len(head) : -len(tail)]
    return inner.split(f" {_CLOSE} ")
