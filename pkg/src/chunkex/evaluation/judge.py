"""Pass/fail judging of retrieval and generation quality via a chat model.

Four prompt kinds cover retrieval appropriateness, question quality, title
quality, and question-keyword consistency. Prompts are fixed templates
(see ``_templates``) substituted in a single pass; the judge endpoint is a
chat-completions style HTTP service called with a system+user message pair
at temperature 0, and the verdict is the last response line that is exactly
``pass`` or ``fail``.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import httpx

from ..errors import MalformedBackendOutput, MissingField, UnparseableVerdict
from ..remote import post_json
from . import _templates

PASS = "pass"
FAIL = "fail"


class JudgePromptKind(Enum):
    RETRIEVAL = "retrieval"
    QUESTION = "question"
    TITLE = "title"
    KEYWORD = "keyword"


# kind -> (system template, user template, field name -> placeholder token)
_TEMPLATES: dict[JudgePromptKind, tuple[str, str, dict[str, str]]] = {
    JudgePromptKind.RETRIEVAL: (
        _templates.RETRIEVAL_SYSTEM,
        _templates.RETRIEVAL_USER,
        {"query": "query", "chunk": "chunk"},
    ),
    JudgePromptKind.QUESTION: (
        _templates.QUESTION_SYSTEM,
        _templates.QUESTION_USER,
        {"chunk": "Chunk", "questions": "Questions", "ground_truth": "Ground truth"},
    ),
    JudgePromptKind.TITLE: (
        _templates.TITLE_SYSTEM,
        _templates.TITLE_USER,
        {"chunk": "Chunk", "title": "Title", "ground_truth": "Ground truth"},
    ),
    JudgePromptKind.KEYWORD: (
        _templates.KEYWORD_SYSTEM,
        _templates.KEYWORD_USER,
        {"question": "Question", "keywords": "Keywords", "ground_truth": "Ground truth"},
    ),
}


@dataclass(frozen=True)
class Judgment:
    query_id: str
    chunk_id: str
    verdict: str  # PASS or FAIL
    rationale: str
    source: str  # "gold" or "llm-judge"

    def __post_init__(self) -> None:
        if self.verdict not in (PASS, FAIL):
            raise ValueError(f"verdict must be {PASS!r} or {FAIL!r}, got {self.verdict!r}")


def _render_value(value: object) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (list, tuple)):
        return ", ".join(str(item) for item in value)
    return str(value)


def build_judge_prompt(
    kind: JudgePromptKind, fields: Mapping[str, object]
) -> tuple[str, str]:
    """Return (system_text, user_text) with placeholders substituted.

    Substitution is a single regex pass over the template, so placeholder-
    looking text inside substituted values is never expanded again.
    """
    system_text, user_template, field_map = _TEMPLATES[kind]
    values: dict[str, str] = {}
    for field_name, placeholder in field_map.items():
        if field_name not in fields:
            raise MissingField(field_name)
        values[placeholder] = _render_value(fields[field_name])
    pattern = re.compile(
        "|".join(re.escape("{" + p + "}") for p in field_map.values())
    )
    user_text = pattern.sub(lambda m: values[m.group(0)[1:-1]], user_template)
    return system_text, user_text


def parse_verdict(response_text: str) -> str:
    """Scan non-empty lines from the end for one that is exactly pass/fail."""
    for line in reversed(response_text.splitlines()):
        candidate = line.strip().lower()
        if not candidate:
            continue
        if candidate in (PASS, FAIL):
            return candidate
    raise UnparseableVerdict(f"no verdict line in {response_text!r:.120}")


class JudgeClient:
    """Chat-completions client issuing system+user pairs at temperature 0.

    The endpoint, model name, and API key come from configuration; the key
    may also arrive via the CHUNKEX_JUDGE_API_KEY environment variable so
    secrets stay out of config files.
    """

    name = "remote-judge"

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        client: httpx.Client | None = None,
        temperature: float = 0.0,
        retries: int = 2,
        backoff: float = 0.25,
    ):
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.retries = retries
        self.backoff = backoff
        key = api_key or os.environ.get("CHUNKEX_JUDGE_API_KEY")
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        self._client = client or httpx.Client(timeout=60.0, headers=headers)

    def complete(self, system_text: str, user_text: str) -> str:
        payload = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": system_text},
                {"role": "user", "content": user_text},
            ],
        }
        data = post_json(
            self._client, self.endpoint, payload, retries=self.retries, backoff=self.backoff
        )
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedBackendOutput(None, "no message content in judge response") from exc
        if not isinstance(content, str):
            raise MalformedBackendOutput(None, "judge message content is not a string")
        return content

    def judge(self, kind: JudgePromptKind, fields: Mapping[str, object]) -> str:
        """Build the prompt, call the judge, and parse the verdict."""
        system_text, user_text = build_judge_prompt(kind, fields)
        return parse_verdict(self.complete(system_text, user_text))

    def judge_retrieval(self, query: str, chunk_text: str) -> str:
        return self.judge(
            JudgePromptKind.RETRIEVAL, {"query": query, "chunk": chunk_text}
        )

    def judge_questions(
        self, chunk_text: str, questions: Sequence[str], ground_truth: str
    ) -> str:
        return self.judge(
            JudgePromptKind.QUESTION,
            {"chunk": chunk_text, "questions": questions, "ground_truth": ground_truth},
        )

    def judge_title(self, chunk_text: str, title: str, ground_truth: str) -> str:
        return self.judge(
            JudgePromptKind.TITLE,
            {"chunk": chunk_text, "title": title, "ground_truth": ground_truth},
        )

    def judge_keywords(
        self, question: str, keywords: Sequence[str], ground_truth: str
    ) -> str:
        return self.judge(
            JudgePromptKind.KEYWORD,
            {"question": question, "keywords": keywords, "ground_truth": ground_truth},
        )
