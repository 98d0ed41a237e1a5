"""Retrieval-quality evaluation: pass-rate tables, greedy matching, judging."""

from .judge import (
    FAIL,
    PASS,
    JudgeClient,
    JudgePromptKind,
    Judgment,
    build_judge_prompt,
    parse_verdict,
)
from .metrics import (
    TOP_K_DEFAULT,
    CaseReport,
    EvalReport,
    greedy_match_score,
    pass_rate_table,
    read_report_records,
    render_table,
    report_records,
    round_rate,
    top_k_pass,
    truncate_rate,
    write_report_records,
)
from .run import (
    GOLD_MODE,
    JUDGE_MODE,
    EvaluationRun,
    GoldQuery,
    check_gold_resolves,
    read_gold,
    run_evaluation,
    write_judgments,
)

__all__ = [
    "CaseReport",
    "EvalReport",
    "EvaluationRun",
    "FAIL",
    "GOLD_MODE",
    "GoldQuery",
    "JUDGE_MODE",
    "JudgeClient",
    "JudgePromptKind",
    "Judgment",
    "PASS",
    "TOP_K_DEFAULT",
    "build_judge_prompt",
    "check_gold_resolves",
    "greedy_match_score",
    "parse_verdict",
    "pass_rate_table",
    "read_gold",
    "read_report_records",
    "render_table",
    "report_records",
    "round_rate",
    "run_evaluation",
    "top_k_pass",
    "truncate_rate",
    "write_judgments",
    "write_report_records",
]
