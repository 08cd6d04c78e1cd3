"""Command-line pipeline: ingest -> index -> embed-graph/train ->
build-context -> query/recommend/serve.

Exit codes: 0 success, 1 user error (bad input, missing stage, unknown
ids), 2 internal error. Every failure prints a one-line diagnostic to
stderr; `--json` switches stdout to machine-readable JSON.
"""

from __future__ import annotations

import json
import sys

import click

from ..corpus import CorpusError, DocumentNotFound
from ..ctxsim import UnknownContext
from ..linkrep import EmbeddingConfig
from ..pairclass import TrainConfig
from ..queryeng import QueryParseError
from .engine import Engine, EngineError, items_to_list


@click.group()
def cli() -> None:
    """Context-aware literature recommendations."""


def _emit(payload, as_json: bool, human_lines) -> None:
    if as_json:
        click.echo(json.dumps(payload, ensure_ascii=False))
    else:
        for line in human_lines:
            click.echo(line)


@cli.command()
@click.argument("jsonl", type=click.Path(exists=True, dir_okay=False))
@click.argument("directory", type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="Context config JSON; a scholarly default is written if omitted.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def ingest(jsonl: str, directory: str, config_path: str | None, as_json: bool) -> None:
    """Parse a JSONL corpus into a fresh engine directory."""
    _, report = Engine.initialize(jsonl, directory, config_path)
    payload = {
        "documents": report.documents,
        "citations": report.citations,
        "dangling": report.dangling,
    }
    _emit(payload, as_json, [
        f"ingested {report.documents} documents "
        f"({report.citations} citations, {report.dangling} dangling) into {directory}",
    ])


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--json", "as_json", is_flag=True)
def index(directory: str, as_json: bool) -> None:
    """Build TF-IDF vectors and the citation/weighted graphs."""
    summary = Engine(directory).build_index()
    _emit(summary, as_json, [
        f"indexed {summary['documents']} documents: {summary['terms']} terms, "
        f"{summary['weighted_edges']} weighted co-citation edges",
    ])


@cli.command("embed-graph")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--dims", default=64, show_default=True)
@click.option("--walks", default=10, show_default=True, help="Walks per node.")
@click.option("--walk-length", default=40, show_default=True)
@click.option("--window", default=5, show_default=True)
@click.option("--negatives", default=5, show_default=True)
@click.option("--epochs", default=3, show_default=True)
@click.option("--learning-rate", default=0.025, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def embed_graph(directory: str, dims: int, walks: int, walk_length: int, window: int,
                negatives: int, epochs: int, learning_rate: float, seed: int,
                as_json: bool) -> None:
    """Train node embeddings over the weighted co-citation graph."""
    config = EmbeddingConfig(
        dims=dims, walks_per_node=walks, walk_length=walk_length, window=window,
        negatives=negatives, epochs=epochs, learning_rate=learning_rate, seed=seed,
    )
    summary = Engine(directory).embed_graph(config)
    _emit(summary, as_json, [
        f"embedded {summary['nodes']} nodes at {summary['dims']} dimensions",
    ])


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.argument("pairs", type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", type=click.Path(exists=True, dir_okay=False),
              help="Word-embedding file (term v1 ... vd) copied into the engine dir.")
@click.option("--alpha", default=0.5, show_default=True,
              help="Link-part weight when text and graph vectors are combined.")
@click.option("--learning-rate", default=0.5, show_default=True)
@click.option("--epochs", default=200, show_default=True)
@click.option("--l2", default=1e-4, show_default=True)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def train(directory: str, pairs: str, embeddings: str | None, alpha: float,
          learning_rate: float, epochs: int, l2: float, batch_size: int, seed: int,
          as_json: bool) -> None:
    """Train the pairwise context classifier from a labeled pairs file."""
    config = TrainConfig(
        learning_rate=learning_rate, epochs=epochs, l2=l2,
        batch_size=batch_size, seed=seed,
    )
    summary = Engine(directory).train_classifier(
        pairs, config, embeddings_path=embeddings, alpha=alpha
    )
    _emit(summary, as_json, [
        f"trained on {summary['pairs']} pairs, classes {summary['classes']}, "
        f"final loss {summary['final_loss']:.6f}",
    ])


@cli.command("build-context")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--json", "as_json", is_flag=True)
def build_context(directory: str, as_json: bool) -> None:
    """Run every configured edge source and merge the context graph."""
    summary = Engine(directory).build_context_graph()
    by_source = ", ".join(
        f"{source}={count}" for source, count in sorted(summary["by_provenance"].items())
    ) or "none"
    _emit(summary, as_json, [
        f"context graph: {summary['edges']} edges ({by_source})",
    ])


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.argument("query_string")
@click.option("--json", "as_json", is_flag=True)
def query(directory: str, query_string: str, as_json: bool) -> None:
    """Answer an analogical query, e.g. "seed=doc1 +method -resource k=5"."""
    engine = Engine(directory)
    items = engine.query(query_string)
    payload = items_to_list(items, engine)
    _emit(payload, as_json, _format_items(payload))


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.argument("seed")
@click.option("--mode", type=click.Choice(["diverse", "focused"]), default="diverse",
              show_default=True)
@click.option("--context", default=None, help="Required for focused mode.")
@click.option("-k", default=10, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def recommend(directory: str, seed: str, mode: str, context: str | None, k: int,
              as_json: bool) -> None:
    """Diverse or focused recommendations for a seed document."""
    engine = Engine(directory)
    items = engine.recommend(seed, mode=mode, context=context, k=k)
    payload = items_to_list(items, engine)
    _emit(payload, as_json, _format_items(payload))


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--no-cors", is_flag=True, help="Disable permissive CORS headers.")
def serve(directory: str, host: str, port: int, no_cors: bool) -> None:
    """Serve the HTTP JSON API over a built engine directory."""
    from pathlib import Path

    from .api import serve as run_server
    from .engine import EngineConfig

    run_server(EngineConfig(directory=Path(directory), host=host, port=port, cors=not no_cors))


def _format_items(payload: list[dict]) -> list[str]:
    if not payload:
        return ["no matches"]
    lines = []
    for rank, item in enumerate(payload, start=1):
        badges = " ".join(
            f"[{m['context']}:{m['sim']:.2f}]" for m in item["matched"]
        )
        title = item["title"] or "(title unknown)"
        lines.append(f"{rank}. {item['id']}  score={item['score']:.3f}  {badges}  {title}")
    return lines


USER_ERRORS = (
    CorpusError,
    DocumentNotFound,
    EngineError,
    QueryParseError,
    UnknownContext,
    FileNotFoundError,
    ValueError,
)


def run_cli(argv: list[str]) -> int:
    """Run the CLI without exiting the interpreter; returns the exit code."""
    try:
        cli.main(args=list(argv), prog_name="ctxrec", standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except USER_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
