"""Acceptance suite: one test per release criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
pass/fail lines alongside pytest's own reporting.
"""

from __future__ import annotations

import functools
import itertools
import math
from pathlib import Path

import numpy as np
import pytest

from chunkex import (
    BioLabel,
    Chunk,
    HashingEmbedder,
    IndexedPassage,
    MockGenerator,
    VectorIndex,
    build_case_index,
    compose_passage,
    decode_bio,
    embed_texts,
    generate_knowledge,
    split_passage,
)
from chunkex.errors import UnparseableVerdict
from chunkex.evaluation import (
    CaseReport,
    GoldQuery,
    parse_verdict,
    run_evaluation,
    truncate_rate,
)

GOLDEN_DIR = Path(__file__).parent / "golden"
KB, KI, O = BioLabel.KB, BioLabel.KI, BioLabel.O


def criterion(number: int, slug: str):
    """Print one pass/fail line per criterion, then let pytest report."""

    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {number} ({slug}): FAIL")
                raise
            print(f"ACCEPTANCE {number} ({slug}): PASS")

        return wrapper

    return decorate


# --- 1. pass-rate table arithmetic ------------------------------------------------

REFERENCE_TABLE = {
    1: ((80.00, 89.18, 90.82, 92.79), 88.19),
    2: ((38.36, 52.13, 55.08, 61.31), 51.72),
    3: ((72.46, 88.85, 90.49, 92.79), 86.14),
    4: ((83.61, 91.48, 94.10, 94.43), 90.90),
    5: ((82.62, 92.46, 93.77, 95.41), 91.06),
    6: ((84.26, 91.80, 94.10, 95.41), 91.39),
    7: ((80.66, 87.54, 91.48, 92.46), 88.03),
}


@criterion(1, "table-average-arithmetic")
def test_criterion_1_reference_table_averages():
    for case_id, (rates, published_avg) in REFERENCE_TABLE.items():
        case = CaseReport.from_rates(case_id, dict(zip((1, 3, 5, 10), rates)))
        rendered = truncate_rate(case.avg)
        assert rendered == pytest.approx(published_avg, abs=0.005), (
            f"case {case_id}: rendered avg {rendered} vs published {published_avg}"
        )


# --- 2. composition golden files ---------------------------------------------------


@criterion(2, "composition-golden-files")
def test_criterion_2_golden_files(sample_chunk, sample_knowledge):
    for case_id in range(1, 8):
        expected = (GOLDEN_DIR / f"case{case_id}.txt").read_bytes()
        passage = compose_passage(case_id, sample_chunk, sample_knowledge)
        assert passage.text.encode("utf-8") == expected, f"case {case_id} drifted"
        items = split_passage(passage.text)
        rendered = {
            "title": sample_knowledge.title,
            "questions": " ".join(sample_knowledge.questions),
            "chunk": sample_chunk.text.replace("\n", " "),
        }
        from chunkex.compose import CASE_SPECS

        assert items == [rendered[item.value] for item in CASE_SPECS[case_id].items]


# --- 3. BIO decode vs brute-force enumeration ----------------------------------------


def bio_span_oracle(labels):
    starts = [
        i
        for i, label in enumerate(labels)
        if label is KB or (label is KI and (i == 0 or labels[i - 1] is O))
    ]
    spans = []
    for start in starts:
        end = start + 1
        while end < len(labels) and labels[end] is KI:
            end += 1
        spans.append((start, end))
    return spans


@criterion(3, "bio-decode-oracle")
def test_criterion_3_exhaustive_bio_decode():
    checked = 0
    orphan_sequences = 0
    for n in range(9):  # all 3^n sequences for n <= 8 (6561 at n=8)
        tokens = [f"t{i}" for i in range(n)]
        for labels in itertools.product([KB, KI, O], repeat=n):
            labels = list(labels)
            spans = decode_bio(tokens, labels)
            assert [(s.start, s.end) for s in spans] == bio_span_oracle(labels)
            orphans = [
                i
                for i, label in enumerate(labels)
                if label is KI and (i == 0 or labels[i - 1] is O)
            ]
            if orphans:
                orphan_sequences += 1
                starts = {s.start for s in spans}
                assert all(i in starts for i in orphans), (
                    f"orphan KI not repaired to a span start: {labels}"
                )
            checked += 1
    assert checked == sum(3**n for n in range(9))
    assert orphan_sequences > 0


# --- 4. exact search vs full-sort oracle ----------------------------------------------


def full_sort_oracle(points, query):
    qn = math.sqrt(sum(x * x for x in query))
    scored = []
    for point_id, vector in points:
        dot = sum(a * b for a, b in zip(vector, query))
        norm = math.sqrt(sum(a * a for a in vector))
        scored.append((point_id, dot / (norm * qn)))
    return sorted(scored, key=lambda item: (-item[1], item[0]))


@criterion(4, "exact-search-oracle")
def test_criterion_4_search_matches_oracle(tmp_path):
    rng = np.random.default_rng(64)
    dim = 64
    points = []
    for i in range(1000):
        vec = rng.normal(size=dim)
        vec /= np.linalg.norm(vec)
        points.append(IndexedPassage(f"p{i:04d}", vec, {"chunk_id": f"c{i}"}))
    index = VectorIndex("bench", dim=dim)
    index.upsert(points)

    raw = [(p.point_id, list(p.vector)) for p in points]
    queries = [rng.normal(size=dim) for _ in range(20)]
    expected = {}
    for qi, query in enumerate(queries):
        ranking = full_sort_oracle(raw, list(query))
        for k in (1, 3, 5, 10):
            hits = index.search(query, k=k)
            assert [h.point_id for h in hits] == [pid for pid, _ in ranking[:k]]
            for hit, (_, score) in zip(hits, ranking[:k]):
                assert abs(hit.score - score) <= 1e-9
        expected[qi] = index.search(query, k=10)

    path = tmp_path / "bench.idx"
    index.snapshot(path)
    restored = VectorIndex.restore(path)
    for qi, query in enumerate(queries):
        assert restored.search(query, k=10) == expected[qi]


# --- 5. greedy matching scores ----------------------------------------------------------


@criterion(5, "greedy-match-scores")
def test_criterion_5_greedy_match():
    from chunkex.evaluation import greedy_match_score

    rng = np.random.default_rng(5)
    identical = rng.normal(size=(6, 8))
    p, r, f1 = greedy_match_score(identical, identical)
    assert abs(p - 1.0) <= 1e-9 and abs(r - 1.0) <= 1e-9 and abs(f1 - 1.0) <= 1e-9

    half = math.sqrt(2) / 2
    p, r, f1 = greedy_match_score([[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [half, half]])
    expected = (1 + half) / 2
    assert abs(p - expected) <= 1e-9
    assert abs(r - expected) <= 1e-9
    assert abs(f1 - expected) <= 1e-9

    for _ in range(100):
        cand = rng.normal(size=(rng.integers(1, 11), 5))
        ref = rng.normal(size=(rng.integers(1, 11), 5))
        p1, r1, f1a = greedy_match_score(cand, ref)
        p2, r2, f1b = greedy_match_score(ref, cand)
        assert abs(p1 - r2) <= 1e-12 and abs(r1 - p2) <= 1e-12 and abs(f1a - f1b) <= 1e-12


# --- 6. desk-scale end-to-end ordering ---------------------------------------------------


def build_synthetic_corpus(n_chunks=500, n_queries=50, seed=20260809):
    """500 chunks with family-stem content tokens; 50 queries, each a
    token-level paraphrase of one generated question for its gold chunk."""
    rng = np.random.default_rng(seed)
    letters = list("abcdefghijklmnopqrstuvwxyz")

    def word(n):
        return "".join(rng.choice(letters, size=n))

    fillers = [word(4) for _ in range(40)]
    used: set[str] = set()

    def unique_word(n):
        while True:
            candidate = word(n)
            if candidate not in used:
                used.add(candidate)
                return candidate

    stems = [unique_word(7) for _ in range(n_chunks // 5)]
    chunks = []
    for i in range(n_chunks):
        theme = unique_word(9)
        content = stems[i // 5] + unique_word(4)  # shared stem confuses chunk-only search
        pick = lambda: rng.choice(fillers)
        text = (
            f"Overview of {theme} with {pick()} {pick()} {pick()}. "
            f"{content} relates to {pick()} {pick()} and {pick()}."
        )
        chunks.append(
            Chunk(
                chunk_id=f"doc{i:03d}#0",
                doc_id=f"doc{i:03d}",
                text=text,
                token_count=len(text.split()),
            )
        )

    knowledge = generate_knowledge(chunks, MockGenerator(max_batch=64), batch=64)
    knowledge_map = {item.chunk_id: item for item in knowledge.require_complete()}

    def paraphrase(question: str) -> str:
        tokens = question.rstrip("?").split()
        swaps = {"What": "what", "does": "is", "this": "", "passage": "", "say": "said"}
        rewritten = [swaps.get(token, token) for token in tokens]
        return " ".join(token for token in rewritten if token) + " in the text"

    chosen = sorted(rng.choice(n_chunks, size=n_queries, replace=False))
    queries = [
        GoldQuery(
            f"q{j:02d}",
            paraphrase(knowledge_map[chunks[i].chunk_id].questions[0]),
            frozenset({chunks[i].chunk_id}),
        )
        for j, i in enumerate(chosen)
    ]
    return chunks, knowledge_map, queries


@criterion(6, "end-to-end-case-ordering")
def test_criterion_6_desk_scale_experiment():
    chunks, knowledge_map, queries = build_synthetic_corpus()
    embedder = HashingEmbedder(dim=256)
    indexes = {
        case_id: build_case_index(case_id, chunks, knowledge_map, embedder)
        for case_id in (1, 2, 6)
    }
    run = run_evaluation(indexes, queries, embedder, k_values=(1, 3, 5, 10))
    cases = run.report.cases

    # (a) Top@k monotone in k for every case
    for case in cases.values():
        assert case.rates[1] <= case.rates[3] <= case.rates[5] <= case.rates[10], (
            f"case {case.case_id} not monotone: {case.rates}"
        )
    # (b) questions+chunk at least as good as chunk-only at Top@1
    assert cases[6].rates[1] >= cases[1].rates[1], (
        f"case 6 Top@1 {cases[6].rates[1]} < case 1 Top@1 {cases[1].rates[1]}"
    )
    # (c) title-only never beats questions+chunk at any k
    for k in (1, 3, 5, 10):
        assert cases[2].rates[k] <= cases[6].rates[k], (
            f"case 2 beats case 6 at k={k}: {cases[2].rates[k]} > {cases[6].rates[k]}"
        )


# --- 7. verdict parsing fixture -------------------------------------------------------------

VERDICT_FIXTURE = [
    ("근거를 단계별로 설명합니다.\npass\npass", "pass"),
    ("분석 결과 부적절합니다.\nfail\nfail", "fail"),
    ("pass", "pass"),
    ("fail", "fail"),
    ("PASS", "pass"),
    ("Fail", "fail"),
    ("  pass  ", "pass"),
    ("\n\npass\n\n", "pass"),
    ("reasoning first\nPASS", "pass"),
    ("reasoning first\nfail\n", "fail"),
    ("fail\npass", "pass"),
    ("pass\nfail", "fail"),
    ("pass\n\n\nfail\n\n", "fail"),
    ("PaSs", "pass"),
    ("FAIL\nFAIL", "fail"),
    ("설명 설명 설명\n\npass", "pass"),
    ("성공입니다\npass\n확인 완료", "pass"),
    ("fail\n이유: 근거 부족", "fail"),
    ("\tpass\t", "pass"),
    ("chunk은 충분한 정보를 담고 있습니다.\n\nPass\nPass", "pass"),
    ("the answer passes", None),
    ("verdict: pass", None),
    ("passing", None),
    ("failed", None),
    ("", None),
    ("   \n  ", None),
    ("pass/fail", None),
    ("결과는 pass입니다", None),
    ("fail.", None),
    ("True", None),
]


@criterion(7, "verdict-parsing")
def test_criterion_7_verdict_fixture():
    assert len(VERDICT_FIXTURE) == 30
    for response, expected in VERDICT_FIXTURE:
        if expected is None:
            with pytest.raises(UnparseableVerdict):
                parse_verdict(response)
        else:
            assert parse_verdict(response) == expected, f"response {response!r}"


# --- 8. batching invariance -----------------------------------------------------------------


@criterion(8, "batching-invariance")
def test_criterion_8_batching_invariance():
    chunks = [
        Chunk(
            chunk_id=f"d#{i}",
            doc_id="d",
            text=f"Entry {i} covers item{i:03d} and general notes value.",
            token_count=9,
        )
        for i in range(100)
    ]
    single = generate_knowledge(chunks, MockGenerator(max_batch=16), batch=1)
    batched = generate_knowledge(chunks, MockGenerator(max_batch=16), batch=16)
    assert single.require_complete() == batched.require_complete()

    embedder = HashingEmbedder(dim=256)
    texts = [f"passage: <s> {chunk.text} </s>" for chunk in chunks]
    one = embed_texts(texts, embedder, batch=1)
    sixteen = embed_texts(texts, embedder, batch=16)
    assert all(np.array_equal(a, b) for a, b in zip(one, sixteen))
