"""Command-line interface mirroring the HTTP service.

Subcommands: generate, question, sync, evaluate, serve. ``--hermetic``
swaps all remote backends for the deterministic mocks so every command can
run offline.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import click

from .config import AppConfig, load_config
from .embedding import EmbedderConfig, HttpEmbedder
from .errors import RefsynthError
from .fulltext import ArxivFetcher, extract_document
from .pipeline import PipelineConfig, generate_related_work
from .selection import GenerationParams
from .service import Backends
from .store import VectorStore
from .sync import HashIndex
from .sync import reload as sync_reload
from .synthesis import HttpLlm, LlmConfig

logger = logging.getLogger(__name__)


def _build_backends(config: AppConfig) -> Backends:
    if config.hermetic:
        from .service import build_hermetic_backends

        return build_hermetic_backends(config)
    store = (
        VectorStore.load(config.store_path)
        if Path(config.store_path).exists()
        else VectorStore(dim=config.dim)
    )
    index = (
        HashIndex.load(config.hash_index_path)
        if Path(config.hash_index_path).exists()
        else HashIndex()
    )
    embedder = HttpEmbedder(
        EmbedderConfig(
            endpoint_url=config.embed_endpoint,
            model_id=config.embed_model,
            dim=config.dim,
        )
    )
    return Backends(
        store=store,
        embedder=embedder,
        llm=HttpLlm(),
        llm_config=LlmConfig(
            endpoint_url=config.llm_endpoint,
            model_id=config.llm_model,
            max_context_tokens=config.llm_max_context_tokens,
        ),
        fetcher=ArxivFetcher(
            cache_dir=config.fetch_cache_dir, delay_seconds=config.fetch_delay_seconds
        ),
        hash_index=index,
    )


@click.group()
@click.option("--config", "config_path", type=click.Path(), default="refsynth.toml")
@click.option("--hermetic", is_flag=True, help="Use deterministic mock backends.")
@click.pass_context
def main(ctx, config_path, hermetic):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    config = load_config(config_path)
    if hermetic:
        config.hermetic = True
    ctx.obj = config


def _run_generation(config, params, abstract=None, pages=None, mode="related-work", question=None):
    backends = _build_backends(config)
    try:
        result = generate_related_work(
            store=backends.store,
            embedder=backends.embedder,
            llm=backends.llm,
            llm_config=backends.llm_config,
            fetcher=backends.fetcher,
            params=params,
            abstract=abstract,
            input_pages=pages,
            mode=mode,
            question=question,
            config=PipelineConfig(
                pool_factor=config.pool_factor,
                shortlist_cap=config.shortlist_cap,
                remote_citation_metadata=not config.hermetic,
            ),
            progress=lambda stage, note: click.echo(f"[{stage}] {note}", err=True),
        )
    except RefsynthError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(result.to_dict(), indent=2, ensure_ascii=False))


@main.command()
@click.option("--abstract-file", type=click.Path(exists=True))
@click.option("--pdf", "pdf_file", type=click.Path(exists=True))
@click.option("--breadth", default=10, show_default=True)
@click.option("--depth", default=2, show_default=True)
@click.option("--diversity", default=0.0, show_default=True)
@click.pass_obj
def generate(config, abstract_file, pdf_file, breadth, depth, diversity):
    """Generate a related-work section from an abstract or a PDF."""
    params = GenerationParams(breadth=breadth, depth=depth, diversity=diversity)
    if pdf_file:
        pages = extract_document(Path(pdf_file).read_bytes())
        _run_generation(config, params, pages=pages)
    elif abstract_file:
        abstract = Path(abstract_file).read_text("utf-8")
        _run_generation(config, params, abstract=abstract)
    else:
        raise click.UsageError("provide --abstract-file or --pdf")


@main.command()
@click.option("--question", required=True)
@click.option("--abstract-file", type=click.Path(exists=True), required=True)
@click.option("--breadth", default=10, show_default=True)
@click.option("--depth", default=2, show_default=True)
@click.option("--diversity", default=0.0, show_default=True)
@click.pass_obj
def question(config, question, abstract_file, breadth, depth, diversity):
    """Answer a scientific question with citation-grounded sources."""
    params = GenerationParams(breadth=breadth, depth=depth, diversity=diversity)
    abstract = Path(abstract_file).read_text("utf-8")
    _run_generation(
        config, params, abstract=abstract, mode="question-answer", question=question
    )


@main.command()
@click.option("--snapshot", type=click.Path(exists=True), required=True,
              help="arXiv metadata dump, one JSON object per line.")
@click.option("--batch-size", default=512, show_default=True)
@click.option("--dry-run", is_flag=True)
@click.pass_obj
def sync(config, snapshot, batch_size, dry_run):
    """Synchronize the corpus store against a metadata snapshot."""
    backends = _build_backends(config)
    with open(snapshot, encoding="utf-8") as fh:
        report = sync_reload(
            fh,
            backends.store,
            backends.hash_index,
            backends.embedder,
            batch_size=batch_size,
            dry_run=dry_run,
        )
    if not dry_run and not config.hermetic:
        backends.store.save(config.store_path)
        backends.hash_index.save(config.hash_index_path)
    click.echo(json.dumps(report.to_dict(), indent=2))


@main.command()
@click.option("--cases", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--judges", "judges_path", type=click.Path(exists=True),
              help="JSON list of judge configs; omit for the scripted mock judge.")
@click.option("--output", type=click.Path(), help="Write the report JSON here.")
@click.pass_obj
def evaluate(config, cases, judges_path, output):
    """Score evaluation cases with LLM judges."""
    from .evaluation import render_table, run_cases

    judges = []
    if judges_path:
        for spec in json.loads(Path(judges_path).read_text("utf-8")):
            judges.append(
                (
                    spec["judge_id"],
                    HttpLlm(),
                    LlmConfig(
                        endpoint_url=spec["endpoint_url"],
                        model_id=spec.get("model_id", "gpt-4o"),
                    ),
                )
            )
    else:
        from .testing import ScriptedLlm

        class _MockJudge(ScriptedLlm):
            def complete(self, prompt, cfg):
                self.calls.append(prompt)
                return f"Score: {sum(prompt.encode()) % 11}"

        judges.append(("mock-judge", _MockJudge(), LlmConfig(model_id="mock")))
    reports = run_cases(cases, judges)
    click.echo(render_table(reports))
    if output:
        Path(output).write_text(
            json.dumps({k: r.to_dict() for k, r in reports.items()}, indent=2), "utf-8"
        )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.pass_obj
def serve(config, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    backends = _build_backends(config)
    app = create_app(backends, config)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
