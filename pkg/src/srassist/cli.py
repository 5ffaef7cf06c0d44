"""Command-line entry points: engine server, HTTP service, kb and eval tools."""
from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

import click

from .config import EngineConfig, load_gateway_config
from .engine import engine_from_fixtures
from .gateway import HashingTestEmbedder, MockCompletionProvider
from .kb.build import build_knowledge_base
from .kb.chunking import document_from_dict
from .kb.store import load as kb_load, persist as kb_persist


def _builtin_scenarios_dir() -> Path:
    return Path(str(resources.files("srassist").joinpath("scenarios")))


def _load_json(path: str) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _mock_provider(script_path: Optional[str]) -> MockCompletionProvider:
    if script_path is None:
        return MockCompletionProvider()
    return MockCompletionProvider.from_script(_load_json(script_path))


@click.group()
def main() -> None:
    """Screen-reader assistance engine."""


@main.command()
@click.option("--listen", "socket_path", type=str, default=None,
              help="Unix socket path to listen on.")
@click.option("--stdio", is_flag=True, help="Serve one session over stdio.")
@click.option("--scenario", "scenario_name", type=str, default=None,
              help="Built-in scenario fixture supplying desktop and model scripts.")
@click.option("--desktop", "desktop_path", type=click.Path(exists=True),
              default=None, help="Desktop script fixture (JSON).")
@click.option("--model", "model_path", type=click.Path(exists=True),
              default=None, help="Mock model script fixture (JSON).")
@click.option("--kb", "kb_path", type=click.Path(exists=True), default=None,
              help="Knowledge-base directory to load.")
@click.option("--gateway-config", type=click.Path(exists=True), default=None,
              help="TOML gateway configuration.")
def serve(socket_path: Optional[str], stdio: bool,
          scenario_name: Optional[str], desktop_path: Optional[str],
          model_path: Optional[str], kb_path: Optional[str],
          gateway_config: Optional[str]) -> None:
    """Serve the wire protocol over a local socket or stdio."""
    from .server import serve_socket, serve_stdio

    if bool(socket_path) == stdio:
        raise click.UsageError("choose exactly one of --listen or --stdio")
    if scenario_name is not None:
        fixture = _load_json(str(_builtin_scenarios_dir()
                                 / f"{scenario_name}.json"))
        desktop = fixture["desktop"]
        model = fixture.get("model", {})
    else:
        if desktop_path is None or model_path is None:
            raise click.UsageError(
                "--desktop and --model are required without --scenario")
        desktop = _load_json(desktop_path)
        model = _load_json(model_path)

    gateway_cfg = load_gateway_config(gateway_config)
    if gateway_cfg.provider_id != "mock":
        raise click.UsageError(
            f"provider {gateway_cfg.provider_id!r} has no adapter here; "
            f"only 'mock' is bundled")
    config = EngineConfig(price_table=gateway_cfg.price_table)
    kb = kb_load(kb_path, expected_embedder_id=HashingTestEmbedder.provider_id) \
        if kb_path else None

    def session_factory():
        return engine_from_fixtures(desktop, model, kb=kb, config=config).session

    if stdio:
        serve_stdio(session_factory)
    else:
        click.echo(f"listening on {socket_path}", err=True)
        serve_socket(session_factory, socket_path)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8765, type=int)
@click.option("--scenario", "scenario_name", type=str, default=None)
@click.option("--desktop", "desktop_path", type=click.Path(exists=True),
              default=None)
@click.option("--model", "model_path", type=click.Path(exists=True),
              default=None)
@click.option("--kb", "kb_path", type=click.Path(exists=True), default=None)
def api(host: str, port: int, scenario_name: Optional[str],
        desktop_path: Optional[str], model_path: Optional[str],
        kb_path: Optional[str]) -> None:
    """Serve the HTTP API (FastAPI over one engine session)."""
    import uvicorn

    from .api import create_app

    if scenario_name is not None:
        fixture = _load_json(str(_builtin_scenarios_dir()
                                 / f"{scenario_name}.json"))
        desktop, model = fixture["desktop"], fixture.get("model", {})
    elif desktop_path is not None and model_path is not None:
        desktop, model = _load_json(desktop_path), _load_json(model_path)
    else:
        raise click.UsageError("pass --scenario or --desktop/--model")
    kb = kb_load(kb_path, expected_embedder_id=HashingTestEmbedder.provider_id) \
        if kb_path else None
    engine = engine_from_fixtures(desktop, model, kb=kb)
    uvicorn.run(create_app(engine), host=host, port=port)


@click.group()
def kb() -> None:
    """Knowledge-base indexing and search."""


@kb.command("index")
@click.option("--docs", "docs_dir", type=click.Path(exists=True), required=True,
              help="Directory of source documents (*.json).")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--languages", default="", help="Comma-separated, e.g. en,zh.")
@click.option("--variants", default=5, type=int,
              help="Paraphrases per chunk per language.")
@click.option("--mock-script", type=click.Path(exists=True), default=None,
              help="Mock provider script for paraphrase generation.")
def kb_index(docs_dir: str, out_dir: str, languages: str, variants: int,
             mock_script: Optional[str]) -> None:
    """Chunk, paraphrase, embed, and persist a knowledge base."""
    docs = [document_from_dict(_load_json(str(p)))
            for p in sorted(Path(docs_dir).glob("*.json"))]
    language_list = [l for l in languages.split(",") if l]
    provider = _mock_provider(mock_script) if language_list else None
    knowledge, errors = build_knowledge_base(
        docs, HashingTestEmbedder(), provider=provider,
        languages=language_list, variants_per_language=variants)
    kb_persist(knowledge, out_dir)
    for error in errors:
        click.echo(f"warning: {error}", err=True)
    click.echo(f"indexed {len(knowledge.chunks)} chunks, "
               f"{len(knowledge.variants)} variants -> {out_dir}")


@kb.command("search")
@click.option("--kb", "kb_dir", type=click.Path(exists=True), required=True)
@click.option("--query", required=True)
@click.option("--k", default=3, type=int)
@click.option("--hyde", is_flag=True, default=False)
@click.option("--mock-script", type=click.Path(exists=True), default=None,
              help="Mock provider script for HyDE expansion.")
def kb_search(kb_dir: str, query: str, k: int, hyde: bool,
              mock_script: Optional[str]) -> None:
    """Search a persisted knowledge base."""
    knowledge = kb_load(kb_dir,
                        expected_embedder_id=HashingTestEmbedder.provider_id)
    provider = _mock_provider(mock_script) if hyde else None
    hits = knowledge.search(query, k, HashingTestEmbedder(),
                            use_hyde=hyde, provider=provider)
    chunks = knowledge.chunks_by_id
    for hit in hits:
        chunk = chunks[hit.chunk_id]
        click.echo(f"{hit.score:.4f}  [{hit.chunk_id}] {chunk.heading_line()}")


@click.group(name="eval")
def eval_cli() -> None:
    """Scenario replay and reporting."""


@eval_cli.command("run")
@click.option("--suite", "suite_dir", type=click.Path(exists=True),
              default=None, help="Scenario directory; defaults to built-ins.")
@click.option("--parallel", default=1, type=int)
@click.option("--max-adaptive", default=None, type=int)
@click.option("--out", "out_path", type=click.Path(), required=True)
def eval_run(suite_dir: Optional[str], parallel: int,
             max_adaptive: Optional[int], out_path: str) -> None:
    """Run a scenario suite and write the machine-readable report."""
    from .evalharness.runner import report_to_dict, run_suite

    suite = suite_dir or str(_builtin_scenarios_dir())
    report = run_suite(suite, max_adaptive_override=max_adaptive,
                       parallel=parallel)
    Path(out_path).write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    ok = sum(1 for t in report.tasks if t.success)
    click.echo(f"{ok}/{len(report.tasks)} tasks succeeded -> {out_path}")


@eval_cli.command("report")
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--format", "format_", type=click.Choice(["table", "json"]),
              default="table")
def eval_report(in_path: str, format_: str) -> None:
    """Render an existing report."""
    from .evalharness.runner import render_report, report_from_dict

    report = report_from_dict(_load_json(in_path))
    click.echo(render_report(report, format=format_), nl=False)


main.add_command(kb)
main.add_command(eval_cli)

if __name__ == "__main__":
    main()
