"""Command line interface: serve | chat | ingest | kb-check | verify | extract."""

from __future__ import annotations

import datetime as dt
import logging
import sys
from pathlib import Path

import click

from . import dialogue, ingest, rake, verify
from .gateway import AppConfig, ConfigError, create_app, load_snapshot
from .kb import load_kb, save_kb
from .verify import (
    AlwaysGlobally,
    DeadlockAtom,
    ExistsEventually,
    Not,
    StateAtom,
    Verdict,
    check,
    product,
)


def _load_config(path: str | None) -> AppConfig:
    try:
        return AppConfig.from_file(path) if path else AppConfig.default()
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc


@click.group()
@click.option(
    "--config",
    "config_path",
    envvar="DA_CONFIG",
    type=click.Path(dir_okay=False),
    default=None,
    help="Path to the JSON config file (or set DA_CONFIG).",
)
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    """Disease-status chatbot: knowledge base, dialogue engine and service."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    ctx.obj = _load_config(config_path)


@main.command()
@click.pass_obj
def serve(config: AppConfig) -> None:
    """Run the HTTP service."""
    import uvicorn

    host, port = config.host_port()
    uvicorn.run(create_app(config), host=host, port=port, log_config=None)


@main.command()
@click.pass_obj
def chat(config: AppConfig) -> None:
    """Chat with the bot on the terminal."""
    snapshot = load_snapshot(config)
    session, greeting = dialogue.new_session(snapshot.replies)
    click.echo(f"bot> {greeting.text}")
    while True:
        try:
            text = click.prompt("you", prompt_suffix="> ", default="", show_default=False)
        except (EOFError, KeyboardInterrupt, click.Abort):
            click.echo("\nbye!")
            return
        if text.strip().lower() in ("quit", "exit"):
            click.echo("bye!")
            return
        session, reply = dialogue.step(
            session,
            text,
            snapshot.kb,
            snapshot.gazetteer,
            snapshot.corpus,
            stops=snapshot.stopwords,
            replies=snapshot.replies,
        )
        click.echo(f"bot> {reply.text}")
        if reply.quick_replies:
            click.echo(f"     [options: {', '.join(reply.quick_replies)}]")


@main.command("ingest")
@click.argument("snapshot_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--date", "date_str", default=None, help="Retrieval date (ISO), default today.")
@click.option("--source", default="", help="Source URL recorded on each row.")
@click.option("--publisher", default="", help="Publisher recorded on each row.")
@click.pass_obj
def ingest_cmd(config: AppConfig, snapshot_file: str, date_str: str | None, source: str, publisher: str) -> None:
    """Parse a snapshot, append it to the store and refresh the kb file."""
    try:
        retrieved = dt.date.fromisoformat(date_str) if date_str else dt.date.today()
    except ValueError as exc:
        raise click.ClickException(f"bad --date: {exc}") from exc
    try:
        html = Path(snapshot_file).read_text(encoding="utf-8")
        parsed = ingest.parse_snapshot(html, retrieved, source_url=source, publisher=publisher)
        store = ingest.append(ingest.load_store(config.store_path), parsed.records)
        ingest.save_store(store, config.store_path)
        kb = ingest.refresh_kb(store, load_kb(config.kb_path), retrieved)
        save_kb(kb, config.kb_path)
    except Exception as exc:  # noqa: BLE001 - surface a one-line diagnostic
        raise click.ClickException(str(exc)) from exc
    click.echo(
        f"ingested {len(parsed.records)} records into {config.store_path} "
        f"(store now {len(store.rows)} rows); kb refreshed at {config.kb_path}"
    )
    for reject in parsed.rejects:
        click.echo(f"rejected row {list(reject.cells)}: {reject.reason}", err=True)
    if parsed.rejects:
        sys.exit(1)


@main.command("kb-check")
@click.option("--kb", "kb_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_obj
def kb_check(config: AppConfig, kb_path: str | None) -> None:
    """Print consistency violations; exit 1 if there are any."""
    path = Path(kb_path) if kb_path else config.kb_path
    try:
        kb = load_kb(path, check=False)
    except Exception as exc:  # noqa: BLE001
        raise click.ClickException(str(exc)) from exc
    violations = kb.check_consistency()
    for violation in violations:
        click.echo(str(violation))
    if violations:
        sys.exit(1)
    click.echo(f"ok: {path} is consistent ({len(kb.concepts)} concepts, {len(kb.individuals)} individuals)")


def standard_suite() -> list[tuple[str, Verdict]]:
    """The dialogue automaton's full property suite.

    Reachability of every state, the response-safety property, deadlock
    freedom, and the three two-instance interleaving properties.
    """
    auto = dialogue.automaton()
    results: list[tuple[str, Verdict]] = []
    for state in sorted(auto.states):
        results.append((f"EF({state})", verify.reachable(auto, StateAtom(state))))
    results.append(
        ("EF(Ontology or TrainedBot)", verify.safety_response(auto))
    )
    results.append(("AG(not deadlock)", check(AlwaysGlobally(Not(DeadlockAtom())), auto)))
    two = product(auto, auto, names=("c1", "c2"))
    for formula in (
        ExistsEventually(verify.And(StateAtom("Ontology", "c1"), StateAtom("TrainedBot", "c2"))),
        ExistsEventually(verify.And(StateAtom("TrainedBot", "c1"), StateAtom("Ontology", "c2"))),
        ExistsEventually(verify.And(StateAtom("Ontology", "c1"), StateAtom("Ontology", "c2"))),
    ):
        results.append((str(formula), check(formula, two)))
    return results


@main.command("verify")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False), required=False)
def verify_cmd(model_file: str | None) -> None:
    """Run the dialogue property suite, or the checks in a model file."""
    try:
        if model_file is None:
            results = standard_suite()
        else:
            parsed = verify.run_model(Path(model_file).read_text(encoding="utf-8"))
            results = [(str(formula), verdict) for formula, verdict in parsed]
    except verify.FormulaError as exc:
        raise click.ClickException(str(exc)) from exc
    failed = 0
    for name, verdict in results:
        mark = click.style("ok", fg="green") if verdict.holds else click.style("FAIL", fg="red")
        click.echo(f"{mark}  {name}")
        if not verdict.holds:
            failed += 1
    if failed:
        raise click.ClickException(f"{failed} propert{'y' if failed == 1 else 'ies'} failed")


@main.command("extract")
@click.option("-t", "top", type=click.IntRange(min=1), default=None, help="Keyword count override.")
@click.option("--stopwords", "stopwords_path", type=click.Path(exists=True, dir_okay=False), default=None)
def extract_cmd(top: int | None, stopwords_path: str | None) -> None:
    """Run keyword extraction on standard input, one 'score<TAB>phrase' per line."""
    stops = rake.StopwordList.from_file(stopwords_path) if stopwords_path else None
    text = sys.stdin.read()
    for keyword in rake.extract(text, stops, t=top):
        click.echo(f"{round(keyword.score, 6)}\t{keyword.phrase}")


if __name__ == "__main__":
    main()
