"""Command-line pipeline: ingest, generate, keywords, index, search, evaluate, report.

Stage outputs are files (JSON Lines, plus one snapshot per case) so the
expensive generation stage never has to be repeated to re-run later stages.
Every command exits nonzero on a stage error, prefixed with the stage name
on stderr; partial judge failures tally on the report instead of failing
the evaluate command.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import NoReturn

import click

from .config import Config, load_config, make_embedder, make_generator, make_judge, make_tagger
from .corpus import chunk_documents, load_corpus, read_chunks, write_chunks
from .embed import embed_query
from .errors import ChunkexError
from .evaluation import (
    GOLD_MODE,
    JUDGE_MODE,
    check_gold_resolves,
    read_gold,
    read_report_records,
    render_table,
    run_evaluation,
    write_judgments,
    write_report_records,
)
from .index import VectorIndex
from .keyword import extract_keywords
from .knowledge import generate_knowledge, read_knowledge, write_knowledge
from .pipeline import build_case_index
from .validation import check_case_ids, check_k_values


def _fail(stage: str, error: Exception) -> NoReturn:
    click.echo(f"{stage}: {error}", err=True)
    sys.exit(1)


def _parse_ints(value: str | None, default: tuple[int, ...]) -> tuple[int, ...]:
    if value is None:
        return default
    try:
        return tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError as exc:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from exc


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="YAML configuration file; endpoints overridable via CHUNKEX_* env vars.",
)
@click.pass_context
def main(ctx: click.Context, config_path: Path | None) -> None:
    """Chunk-knowledge document expansion and retrieval evaluation."""
    try:
        ctx.obj = load_config(config_path)
    except (ChunkexError, OSError) as exc:
        _fail("config", exc)


@main.command()
@click.option("--documents", type=click.Path(path_type=Path), default=None)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--budget", type=int, default=None)
@click.pass_obj
def ingest(config: Config, documents: Path | None, out: Path | None, budget: int | None) -> None:
    """Load the corpus, chunk under the token budget, write the chunk file."""
    try:
        docs = load_corpus(documents or config.documents)
        result = chunk_documents(docs, budget=budget or config.budget)
        out_path = out or config.chunks_path
        out_path.parent.mkdir(parents=True, exist_ok=True)
        write_chunks(result.chunks, out_path)
    except (ChunkexError, OSError, ValueError) as exc:
        _fail("ingest", exc)
    click.echo(f"documents={len(docs)} chunks={len(result.chunks)} dropped={len(result.dropped)}")


@main.command()
@click.option("--chunks", type=click.Path(path_type=Path), default=None)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def generate(config: Config, chunks: Path | None, out: Path | None) -> None:
    """Generate one title and three candidate questions per chunk."""
    try:
        chunk_list = read_chunks(chunks or config.chunks_path)
        backend = make_generator(config)
        result = generate_knowledge(
            chunk_list,
            backend,
            batch=min(config.batch_size, backend.max_batch),
            max_in_flight=config.max_in_flight,
        )
        out_path = out or config.knowledge_path
        out_path.parent.mkdir(parents=True, exist_ok=True)
        write_knowledge(result.knowledge, out_path)
    except (ChunkexError, OSError, ValueError) as exc:
        _fail("generate", exc)
    click.echo(
        f"chunks={len(chunk_list)} generated={len(result.knowledge)} "
        f"failures={len(result.failures)}"
    )
    if result.failures:
        for failure in result.failures[:10]:
            click.echo(f"generate: {failure.chunk_id}: {failure.error}", err=True)
        sys.exit(1)


@main.command()
@click.argument("query", required=False)
@click.option("--queries", type=click.Path(path_type=Path), default=None,
              help="JSONL of {query_id, query}; writes keywords per query.")
@click.option("--knowledge", "knowledge_path", type=click.Path(path_type=Path), default=None,
              help="Knowledge JSONL; writes keywords per chunk from its questions.")
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def keywords(
    config: Config,
    query: str | None,
    queries: Path | None,
    knowledge_path: Path | None,
    out: Path | None,
) -> None:
    """Extract keyword spans; with a QUERY argument, print one per line."""
    modes = sum(x is not None for x in (query, queries, knowledge_path))
    if modes != 1:
        raise click.UsageError("give exactly one of QUERY, --queries, or --knowledge")
    tagger = make_tagger(config)
    try:
        if query is not None:
            for span in extract_keywords(query, tagger):
                click.echo(span.text)
            return
        out_path = out or config.keywords_path
        out_path.parent.mkdir(parents=True, exist_ok=True)
        rows: list[dict] = []
        if queries is not None:
            with open(queries, encoding="utf-8") as handle:
                for line in handle:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    spans = extract_keywords(record["query"], tagger)
                    rows.append(
                        {
                            "query_id": record.get("query_id"),
                            "query": record["query"],
                            "keywords": [span.text for span in spans],
                        }
                    )
        else:
            for item in read_knowledge(knowledge_path):
                found: list[str] = []
                for question in item.questions:
                    for span in extract_keywords(question, tagger):
                        if span.text not in found:
                            found.append(span.text)
                rows.append({"chunk_id": item.chunk_id, "keywords": found})
        with open(out_path, "w", encoding="utf-8") as handle:
            for row in rows:
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")
    except (ChunkexError, OSError, KeyError, ValueError) as exc:
        _fail("keywords", exc)
    click.echo(f"records={len(rows)} out={out_path}")


@main.group()
def index() -> None:
    """Build and query per-case vector index snapshots."""


@index.command("build")
@click.option("--case", "case_id", type=int, default=None, help="Build a single case.")
@click.option("--cases", default=None, help="Comma-separated case ids (default: config).")
@click.option("--keywords", "keywords_path", type=click.Path(path_type=Path), default=None,
              help="Optional JSONL of {chunk_id, keywords} to attach to payloads.")
@click.pass_obj
def index_build(
    config: Config, case_id: int | None, cases: str | None, keywords_path: Path | None
) -> None:
    """Compose, embed, and snapshot one collection per case."""
    if case_id is not None and cases is not None:
        raise click.UsageError("give --case or --cases, not both")
    try:
        selected = (case_id,) if case_id is not None else _parse_ints(cases, config.cases)
        case_ids = check_case_ids(selected)
        chunk_list = read_chunks(config.chunks_path)
        knowledge_map = None
        if any(cid != 1 for cid in case_ids):
            knowledge_map = {
                item.chunk_id: item for item in read_knowledge(config.knowledge_path)
            }
        keywords_map = None
        if keywords_path is not None:
            keywords_map = {}
            with open(keywords_path, encoding="utf-8") as handle:
                for line in handle:
                    if line.strip():
                        record = json.loads(line)
                        keywords_map[record["chunk_id"]] = record["keywords"]
        embedder = make_embedder(config)
        config.snapshots.mkdir(parents=True, exist_ok=True)
        for case_id in case_ids:
            built = build_case_index(
                case_id,
                chunk_list,
                knowledge_map,
                embedder,
                batch=config.batch_size,
                max_in_flight=config.max_in_flight,
                keywords=keywords_map,
                question_separator=config.question_separator,
            )
            path = config.snapshot_path(case_id)
            built.snapshot(path)
            click.echo(f"case={case_id} points={len(built)} snapshot={path}")
    except (ChunkexError, OSError, KeyError, ValueError) as exc:
        _fail("index", exc)


@click.command("search")
@click.option("--case", "case_id", type=int, required=True)
@click.option("--k", type=int, default=10, show_default=True)
@click.argument("query")
@click.pass_obj
def search(config: Config, case_id: int, k: int, query: str) -> None:
    """Ad-hoc search against one case snapshot; prints rank, score, chunk id."""
    try:
        check_case_ids([case_id])
        loaded = VectorIndex.restore(config.snapshot_path(case_id))
        embedder = make_embedder(config)
        hits = loaded.search(embed_query(query, embedder), k)
    except (ChunkexError, OSError, ValueError) as exc:
        _fail("search", exc)
    for rank, hit in enumerate(hits, start=1):
        click.echo(f"{rank}\t{hit.score:.6f}\t{hit.payload.get('chunk_id', hit.point_id)}")


index.add_command(search, name="search")
main.add_command(search, name="search")


@main.command()
@click.option("--cases", default=None, help="Comma-separated case ids (default: config).")
@click.option("--k", "k_spec", default=None, help="Comma-separated k values (default: config).")
@click.option("--mode", type=click.Choice([GOLD_MODE, JUDGE_MODE]), default=None)
@click.option("--gold", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def evaluate(
    config: Config, cases: str | None, k_spec: str | None, mode: str | None, gold: Path | None
) -> None:
    """Run Top@k evaluation over built case snapshots and write the report."""
    try:
        case_ids = check_case_ids(_parse_ints(cases, config.cases))
        k_values = check_k_values(_parse_ints(k_spec, config.k_values))
        eval_mode = mode or config.mode
        gold_path = gold or config.gold
        if gold_path is None:
            raise ChunkexError("no gold labels file configured (evaluation.gold)")
        queries = read_gold(gold_path)
        chunk_list = read_chunks(config.chunks_path)
        check_gold_resolves(queries, (c.chunk_id for c in chunk_list))
        indexes = {
            case_id: VectorIndex.restore(config.snapshot_path(case_id))
            for case_id in case_ids
        }
        judge = make_judge(config)
        if eval_mode == JUDGE_MODE and judge is None:
            raise ChunkexError("judge mode needs a judge endpoint (judge.endpoint)")
        run = run_evaluation(
            indexes,
            queries,
            make_embedder(config),
            k_values=k_values,
            mode=eval_mode,
            judge=judge,
            chunk_texts={c.chunk_id: c.text for c in chunk_list},
            max_in_flight=config.max_in_flight,
        )
        config.eval_dir.mkdir(parents=True, exist_ok=True)
        write_report_records(run.report, config.eval_dir / "rates.jsonl")
        if eval_mode == JUDGE_MODE:
            write_judgments(run.judgments, config.eval_dir / "judgments.jsonl")
    except (ChunkexError, OSError, ValueError) as exc:
        _fail("evaluate", exc)
    click.echo(render_table(run.report))


@main.command()
@click.option("--rates", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def report(config: Config, rates: Path | None) -> None:
    """Render the pass-rate table from rate records."""
    try:
        loaded = read_report_records(rates or config.eval_dir / "rates.jsonl")
    except (ChunkexError, OSError, ValueError) as exc:
        _fail("report", exc)
    click.echo(render_table(loaded))


if __name__ == "__main__":
    main()
