from __future__ import annotations

from pathlib import Path

import pytest

from chunkex import CASE_SPECS, Chunk, compose_passage, compose_query, split_passage
from chunkex.compose import Item
from chunkex.errors import EmptyQuery, MissingKnowledge

GOLDEN_DIR = Path(__file__).parent / "golden"


def test_case_table_is_exactly_the_seven_fixed_orderings():
    T, Q, C = Item.TITLE, Item.QUESTIONS, Item.CHUNK
    assert {cid: spec.items for cid, spec in CASE_SPECS.items()} == {
        1: (C,),
        2: (T,),
        3: (Q,),
        4: (T, Q, C),
        5: (Q, T, C),
        6: (Q, C),
        7: (T, C),
    }


@pytest.mark.parametrize("case_id", sorted(CASE_SPECS))
def test_golden_files_byte_exact(case_id, sample_chunk, sample_knowledge):
    expected = (GOLDEN_DIR / f"case{case_id}.txt").read_bytes()
    passage = compose_passage(case_id, sample_chunk, sample_knowledge)
    assert passage.text.encode("utf-8") == expected
    assert passage.case_id == case_id
    assert passage.chunk_id == sample_chunk.chunk_id


@pytest.mark.parametrize("case_id", sorted(CASE_SPECS))
def test_round_trip_recovers_items(case_id, sample_chunk, sample_knowledge):
    passage = compose_passage(case_id, sample_chunk, sample_knowledge)
    items = split_passage(passage.text)
    assert len(items) == len(CASE_SPECS[case_id].items)
    rendered = {
        Item.TITLE: sample_knowledge.title,
        Item.QUESTIONS: " ".join(sample_knowledge.questions),
        Item.CHUNK: sample_chunk.text.replace("\n", " "),
    }
    assert items == [rendered[item] for item in CASE_SPECS[case_id].items]


def test_case1_minimal_example():
    chunk = Chunk(chunk_id="c", doc_id="d", text="Solar basics.", token_count=2)
    assert compose_passage(1, chunk).text == "passage: <s> Solar basics. </s>"


def test_case7_title_then_chunk():
    chunk = Chunk(chunk_id="c", doc_id="d", text="C", token_count=1)
    knowledge = _knowledge(title="T")
    assert compose_passage(7, chunk, knowledge).text == "passage: <s> T </s> C </s>"


def test_case6_questions_then_chunk():
    chunk = Chunk(chunk_id="c", doc_id="d", text="C", token_count=1)
    knowledge = _knowledge(questions=("Q1?", "Q2?", "Q3?"))
    assert compose_passage(6, chunk, knowledge).text == "passage: <s> Q1? Q2? Q3? </s> C </s>"


def _knowledge(title="T", questions=("Q1?", "Q2?", "Q3?")):
    from chunkex import ChunkKnowledge

    return ChunkKnowledge(chunk_id="c", title=title, questions=tuple(questions))


def test_separator_count_matches_item_count(sample_chunk, sample_knowledge):
    for case_id, spec in CASE_SPECS.items():
        text = compose_passage(case_id, sample_chunk, sample_knowledge).text
        assert text.count(" </s>") == len(spec.items)
        assert text.startswith("passage: <s> ")
        assert text.endswith(" </s>")
        assert text.count("passage: ") == 1


def test_newlines_in_chunk_become_spaces(sample_knowledge):
    chunk = Chunk(chunk_id="c", doc_id="d", text="line one\nline two\r\nline three", token_count=6)
    text = compose_passage(1, chunk).text
    assert "\n" not in text and "\r" not in text
    assert "line one line two line three" in text


def test_missing_knowledge_raises(sample_chunk):
    with pytest.raises(MissingKnowledge) as excinfo:
        compose_passage(6, sample_chunk, None)
    assert excinfo.value.case_id == 6
    assert excinfo.value.chunk_id == sample_chunk.chunk_id


def test_case1_needs_no_knowledge(sample_chunk):
    assert compose_passage(1, sample_chunk, None).text.startswith("passage: <s> ")


def test_delimiter_inside_item_rejected(sample_chunk):
    bad = _knowledge(title="evil </s> title")
    with pytest.raises(ValueError):
        compose_passage(7, sample_chunk, bad)


def test_question_separator_knob(sample_chunk):
    knowledge = _knowledge(questions=("A?", "B?", "C?"))
    text = compose_passage(3, sample_chunk, knowledge, question_separator=" | ").text
    assert text == "passage: <s> A? | B? | C? </s>"


def test_unknown_case_id_rejected(sample_chunk):
    with pytest.raises(ValueError):
        compose_passage(8, sample_chunk, _knowledge())


def test_compose_query_prefix():
    assert compose_query("abc") == "query: abc"


def test_compose_query_strips_whitespace():
    assert compose_query("  padded query \n") == "query: padded query"


def test_compose_query_empty():
    with pytest.raises(EmptyQuery):
        compose_query("   ")


def test_split_rejects_non_passage():
    with pytest.raises(ValueError):
        split_passage("query: not a passage")
