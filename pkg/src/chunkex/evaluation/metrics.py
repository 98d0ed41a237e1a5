"""Retrieval metrics: Top@k pass rates, their average, and greedy-match scores.

Rate arithmetic stays in full precision internally; decimals appear only at
rendering. Per-k rates render with round-half-away-from-zero to two
decimals, while the Avg column truncates toward zero to two decimals, which
is the convention the reference result tables follow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_DOWN, ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Callable, Collection, Mapping, Sequence

import numpy as np

from ..errors import DimensionMismatch, EmptyQuerySet, EmptySequence, MalformedRecord
from ..validation import check_k_values

TOP_K_DEFAULT = (1, 3, 5, 10)


def round_rate(value: float, ndigits: int = 2) -> float:
    """Round half away from zero at ``ndigits`` decimals (decimal-exact)."""
    quantum = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def truncate_rate(value: float, ndigits: int = 2) -> float:
    """Truncate toward zero at ``ndigits`` decimals (decimal-exact)."""
    quantum = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_DOWN))


def top_k_pass(
    hits: Sequence[str],
    relevant: Collection[str] | Callable[[str], bool],
    k: int,
) -> bool:
    """True iff any of the first min(k, len(hits)) chunk ids is relevant."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    is_relevant = relevant if callable(relevant) else relevant.__contains__
    return any(is_relevant(chunk_id) for chunk_id in hits[:k])


@dataclass(frozen=True)
class CaseReport:
    """Pass rates for one passage-composition case, full precision."""

    case_id: int
    rates: dict[int, float]  # k -> percent
    n_queries: int
    passes: dict[int, int] = field(default_factory=dict)

    @property
    def avg(self) -> float:
        return sum(self.rates.values()) / len(self.rates)

    @classmethod
    def from_rates(cls, case_id: int, rates: Mapping[int, float], n_queries: int = 0) -> "CaseReport":
        report = cls(case_id=case_id, rates=dict(rates), n_queries=n_queries)
        _check_monotone(report)
        return report


@dataclass(frozen=True)
class EvalReport:
    """Per-case pass-rate table over a fixed k set."""

    k_values: tuple[int, ...]
    cases: dict[int, CaseReport]
    n_queries: int
    judge_errors: int = 0


def _check_monotone(case: CaseReport) -> None:
    ks = sorted(case.rates)
    for low, high in zip(ks, ks[1:]):
        if case.rates[low] > case.rates[high] + 1e-9:
            raise ValueError(
                f"case {case.case_id}: pass rate at k={low} exceeds k={high}; "
                "per-k results must come from prefixes of one ranked list"
            )


def pass_rate_table(
    results: Mapping[int, Mapping[int, Sequence[bool]]],
    judge_errors: int = 0,
) -> EvalReport:
    """Aggregate per-query booleans into an :class:`EvalReport`.

    ``results[case_id][k]`` is one boolean per query. Every case and k must
    cover the same query set; rates are ``100 * passes / queries`` and each
    case's average is the arithmetic mean of its k-rates.
    """
    if not results:
        raise EmptyQuerySet("no cases to aggregate")
    k_values: tuple[int, ...] | None = None
    n_queries: int | None = None
    cases: dict[int, CaseReport] = {}
    for case_id, per_k in results.items():
        ks = check_k_values(sorted(per_k))
        if k_values is None:
            k_values = ks
        elif ks != k_values:
            raise ValueError(f"case {case_id}: k set {ks} differs from {k_values}")
        rates: dict[int, float] = {}
        passes: dict[int, int] = {}
        for k in ks:
            outcomes = list(per_k[k])
            if n_queries is None:
                n_queries = len(outcomes)
            elif len(outcomes) != n_queries:
                raise ValueError(
                    f"case {case_id} k={k}: {len(outcomes)} queries, expected {n_queries}"
                )
            if not outcomes:
                raise EmptyQuerySet("cannot compute pass rates over zero queries")
            passes[k] = sum(bool(x) for x in outcomes)
            rates[k] = 100.0 * passes[k] / len(outcomes)
        case = CaseReport(case_id=case_id, rates=rates, n_queries=n_queries, passes=passes)
        _check_monotone(case)
        cases[case_id] = case
    return EvalReport(
        k_values=k_values, cases=cases, n_queries=n_queries or 0, judge_errors=judge_errors
    )


def render_table(report: EvalReport) -> str:
    """Human-readable pass-rate table; one row per case plus Avg column."""
    headers = ["Case"] + [f"Top@{k}" for k in report.k_values] + ["Avg"]
    rows = [headers]
    for case_id in sorted(report.cases):
        case = report.cases[case_id]
        cells = [f"Case {case_id}"]
        cells += [f"{round_rate(case.rates[k]):.2f}" for k in report.k_values]
        cells.append(f"{truncate_rate(case.avg):.2f}")
        rows.append(cells)
    widths = [max(len(row[i]) for row in rows) for i in range(len(headers))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.rjust(w) if i else cell.ljust(w)
                               for i, (cell, w) in enumerate(zip(row, widths))))
    if report.judge_errors:
        lines.append(f"judge errors: {report.judge_errors}")
    return "\n".join(lines)


def report_records(report: EvalReport) -> list[dict]:
    """Machine-readable records: one per (case, k) plus one avg per case."""
    records: list[dict] = []
    for case_id in sorted(report.cases):
        case = report.cases[case_id]
        for k in report.k_values:
            record = {"case_id": case_id, "k": k, "rate": case.rates[k]}
            if case.passes:
                record["passes"] = case.passes[k]
                record["queries"] = case.n_queries
            records.append(record)
        records.append({"case_id": case_id, "avg": case.avg})
    return records


def write_report_records(report: EvalReport, path: str | Path) -> int:
    records = report_records(report)
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    return len(records)


def read_report_records(path: str | Path) -> EvalReport:
    """Rebuild an :class:`EvalReport` from per-(case, k) rate records."""
    rates: dict[int, dict[int, float]] = {}
    passes: dict[int, dict[int, int]] = {}
    n_queries = 0
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_number, f"invalid JSON: {exc.msg}") from exc
            if "avg" in record:
                continue  # derived; recomputed from the k-rates
            try:
                case_id = int(record["case_id"])
                k = int(record["k"])
                rate = float(record["rate"])
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(line_number, f"bad rate record: {exc}") from exc
            rates.setdefault(case_id, {})[k] = rate
            if "passes" in record:
                passes.setdefault(case_id, {})[k] = int(record["passes"])
                n_queries = max(n_queries, int(record.get("queries", 0)))
    if not rates:
        raise EmptyQuerySet("no rate records found")
    k_values = check_k_values(sorted(next(iter(rates.values()))))
    for case_id, per_k in rates.items():
        if tuple(sorted(per_k)) != k_values:
            raise MalformedRecord(0, f"case {case_id} k set differs from {k_values}")
    cases = {
        case_id: CaseReport(
            case_id=case_id,
            rates=per_k,
            n_queries=n_queries,
            passes=passes.get(case_id, {}),
        )
        for case_id, per_k in rates.items()
    }
    for case in cases.values():
        _check_monotone(case)
    return EvalReport(k_values=k_values, cases=cases, n_queries=n_queries)


def greedy_match_score(
    candidate_token_vectors: Sequence[Sequence[float]] | np.ndarray,
    reference_token_vectors: Sequence[Sequence[float]] | np.ndarray,
) -> tuple[float, float, float]:
    """Greedy token-matching precision, recall, and F1 over cosine maxima.

    Precision averages, over candidate tokens, the best cosine against any
    reference token; recall mirrors it over reference tokens; F1 is their
    harmonic mean, defined as 0 when P + R is 0.
    """
    cand = np.asarray(candidate_token_vectors, dtype=np.float64)
    ref = np.asarray(reference_token_vectors, dtype=np.float64)
    if cand.size == 0 or ref.size == 0:
        raise EmptySequence("token-vector sequences must be non-empty")
    if cand.ndim != 2 or ref.ndim != 2:
        raise ValueError("expected 2-D arrays of token vectors")
    if cand.shape[1] != ref.shape[1]:
        raise DimensionMismatch(cand.shape[1], ref.shape[1])
    if not (np.all(np.isfinite(cand)) and np.all(np.isfinite(ref))):
        raise ValueError("token vectors contain non-finite entries")

    cand_norms = np.linalg.norm(cand, axis=1, keepdims=True)
    ref_norms = np.linalg.norm(ref, axis=1, keepdims=True)
    if np.any(cand_norms == 0.0) or np.any(ref_norms == 0.0):
        raise ValueError("zero token vectors have no cosine similarity")
    sim = np.clip((cand / cand_norms) @ (ref / ref_norms).T, -1.0, 1.0)

    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    denominator = precision + recall
    f1 = 0.0 if denominator == 0.0 else 2.0 * precision * recall / denominator
    return precision, recall, f1
