"""Configuration: one YAML document, endpoints overridable by environment.

Remote endpoints are all optional; a null endpoint selects the
deterministic offline backend (mock generator, gazetteer tagger, hashing
embedder). The judge has no offline stand-in, so judge mode requires an
endpoint. Secrets (the judge API key) come only from the environment.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .embed import HashingEmbedder, HttpEmbedder
from .errors import ConfigError
from .evaluation.judge import JudgeClient
from .evaluation.run import GOLD_MODE, JUDGE_MODE
from .keyword import GazetteerTagger, HttpTagger
from .knowledge import HttpGenerator, MockGenerator
from .validation import check_case_ids, check_k_values, check_positive_int

_ENV_OVERRIDES = {
    "CHUNKEX_GENERATOR_ENDPOINT": "generator_endpoint",
    "CHUNKEX_TAGGER_ENDPOINT": "tagger_endpoint",
    "CHUNKEX_EMBEDDER_ENDPOINT": "embedder_endpoint",
    "CHUNKEX_JUDGE_ENDPOINT": "judge_endpoint",
    "CHUNKEX_JUDGE_MODEL": "judge_model",
}


@dataclass(frozen=True)
class Config:
    documents: Path = Path("data/documents.jsonl")
    gold: Path | None = None
    budget: int = 512
    cases: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7)
    k_values: tuple[int, ...] = (1, 3, 5, 10)
    artifacts_dir: Path = Path("artifacts")
    snapshot_dir: Path | None = None  # defaults to artifacts_dir / "snapshots"
    embedding_dim: int = 256
    embedder_endpoint: str | None = None
    generator_endpoint: str | None = None
    tagger_endpoint: str | None = None
    judge_endpoint: str | None = None
    judge_model: str = "gpt-4o"
    gazetteer: tuple[str, ...] = ()
    batch_size: int = 16
    max_in_flight: int = 1
    question_separator: str = " "
    mode: str = GOLD_MODE

    @property
    def snapshots(self) -> Path:
        return self.snapshot_dir or self.artifacts_dir / "snapshots"

    @property
    def chunks_path(self) -> Path:
        return self.artifacts_dir / "chunks.jsonl"

    @property
    def knowledge_path(self) -> Path:
        return self.artifacts_dir / "knowledge.jsonl"

    @property
    def keywords_path(self) -> Path:
        return self.artifacts_dir / "keywords.jsonl"

    @property
    def eval_dir(self) -> Path:
        return self.artifacts_dir / "eval"

    def snapshot_path(self, case_id: int) -> Path:
        return self.snapshots / f"case-{case_id}.idx"

    def validate(self) -> "Config":
        try:
            check_positive_int(self.budget, "budget")
            check_case_ids(self.cases)
            check_k_values(self.k_values)
            check_positive_int(self.embedding_dim, "embedding dim")
            check_positive_int(self.batch_size, "batch size")
            check_positive_int(self.max_in_flight, "max_in_flight")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.mode not in (GOLD_MODE, JUDGE_MODE):
            raise ConfigError(f"mode must be {GOLD_MODE!r} or {JUDGE_MODE!r}")
        return self


def _section(data: dict, name: str) -> dict:
    value = data.get(name) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    return value


def load_config(path: str | Path | None = None) -> Config:
    """Read YAML config (all keys optional), then apply env overrides."""
    config = Config()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as handle:
                data = yaml.safe_load(handle) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")

        corpus = _section(data, "corpus")
        artifacts = _section(data, "artifacts")
        embedding = _section(data, "embedding")
        generator = _section(data, "generator")
        tagger = _section(data, "tagger")
        judge = _section(data, "judge")
        evaluation = _section(data, "evaluation")
        composing = _section(data, "compose")

        updates: dict = {}
        if "documents" in corpus:
            updates["documents"] = Path(corpus["documents"])
        if "budget" in corpus:
            updates["budget"] = corpus["budget"]
        if "dir" in artifacts:
            updates["artifacts_dir"] = Path(artifacts["dir"])
        if "snapshots" in artifacts:
            updates["snapshot_dir"] = Path(artifacts["snapshots"])
        if "cases" in data:
            updates["cases"] = tuple(data["cases"])
        if "k" in data:
            updates["k_values"] = tuple(data["k"])
        if "dim" in embedding:
            updates["embedding_dim"] = embedding["dim"]
        if "endpoint" in embedding:
            updates["embedder_endpoint"] = embedding["endpoint"]
        if "batch" in embedding or "batch" in generator:
            updates["batch_size"] = generator.get("batch", embedding.get("batch"))
        if "endpoint" in generator:
            updates["generator_endpoint"] = generator["endpoint"]
        if "max_in_flight" in generator:
            updates["max_in_flight"] = generator["max_in_flight"]
        if "endpoint" in tagger:
            updates["tagger_endpoint"] = tagger["endpoint"]
        if "gazetteer" in tagger:
            updates["gazetteer"] = tuple(tagger["gazetteer"])
        if "endpoint" in judge:
            updates["judge_endpoint"] = judge["endpoint"]
        if "model" in judge:
            updates["judge_model"] = judge["model"]
        if "gold" in evaluation and evaluation["gold"] is not None:
            updates["gold"] = Path(evaluation["gold"])
        if "mode" in evaluation:
            updates["mode"] = evaluation["mode"]
        if "question_separator" in composing:
            updates["question_separator"] = composing["question_separator"]
        config = replace(config, **updates)

    env_updates = {
        attr: os.environ[var] for var, attr in _ENV_OVERRIDES.items() if var in os.environ
    }
    if env_updates:
        config = replace(config, **env_updates)
    return config.validate()


def make_generator(config: Config):
    if config.generator_endpoint:
        return HttpGenerator(config.generator_endpoint, max_batch=config.batch_size)
    return MockGenerator(max_batch=config.batch_size)


def make_tagger(config: Config):
    if config.tagger_endpoint:
        return HttpTagger(config.tagger_endpoint)
    return GazetteerTagger(config.gazetteer)


def make_embedder(config: Config, probe: bool = True):
    if config.embedder_endpoint:
        backend = HttpEmbedder(
            config.embedder_endpoint, dim=config.embedding_dim, max_batch=config.batch_size
        )
        if probe:  # fail at startup if the service is down or wrong-dim
            backend.check()
        return backend
    return HashingEmbedder(dim=config.embedding_dim)


def make_judge(config: Config) -> JudgeClient | None:
    if config.judge_endpoint:
        return JudgeClient(config.judge_endpoint, model=config.judge_model)
    return None
