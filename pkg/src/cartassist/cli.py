"""Command-line shell: validate stores, run scenarios, serve, or talk in a repl."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import Config, build_clients, default_store_path, load_config, parse_start_pose
from .errors import ConfigError, ParseError, ValidationError
from .events import ButtonVariant
from .scenario import load_scenario, report_text, run_scenario
from .session import Session
from .simulator import Command
from .store import load_store


def _load_store_file(path: str | Path):
    text = Path(path).read_text(encoding="utf-8")
    return load_store(text)


def _resolve_config(config_path: str | None, store_path: str | None, mode: str | None, seed: int | None) -> Config:
    config = load_config(config_path)
    if store_path:
        config.store_path = store_path
    if mode:
        config.provider_mode = mode
    if seed is not None:
        config.seed = seed
    return config


@click.group()
def main() -> None:
    """Simulated AI shopping-assistant cart."""


@main.command()
@click.argument("store_path", type=click.Path())
def validate(store_path: str) -> None:
    """Validate a store file; exit 0 when valid, 1 on violations, 2 when unreadable."""
    try:
        text = Path(store_path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"cannot read {store_path}: {exc}", err=True)
        sys.exit(2)
    try:
        store = load_store(text)
    except ParseError as exc:
        click.echo(f"parse error: {exc}")
        sys.exit(1)
    except ValidationError as exc:
        for problem in exc.problems:
            click.echo(problem)
        sys.exit(1)
    click.echo(
        f"OK: {store.map.width}x{store.map.height} map, {len(store.shelves)} shelves, "
        f"{len(store.markers)} markers, {len(store.products)} products"
    )


@main.command()
@click.argument("script_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--store", "store_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=None)
def scenario(script_path: str, store_path: str | None, config_path: str | None, seed: int | None) -> None:
    """Run a scenario script headless with mock clients and print the report."""
    config = _resolve_config(config_path, store_path, None, seed)
    store = _load_store_file(config.store_path or default_store_path())
    script = load_scenario(script_path)
    if seed is not None:
        script.seed = seed
    report = run_scenario(script, store, config)
    click.echo(report_text(report), nl=False)
    sys.exit(0 if report.success else 1)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--store", "store_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--mock/--remote", "mock_mode", default=None)
@click.option("--seed", type=int, default=None)
def serve(config_path, store_path, host, port, mock_mode, seed) -> None:
    """Serve the HTTP API (and the cockpit UI when frontend/dist exists)."""
    import uvicorn

    from .api import create_app

    mode = None if mock_mode is None else ("mock" if mock_mode else "remote")
    try:
        config = _resolve_config(config_path, store_path, mode, seed)
        store = _load_store_file(config.store_path or default_store_path())
        clients = build_clients(config)
        session = Session(store, config, clients)
    except (ConfigError, ParseError, ValidationError) as exc:
        click.echo(f"cannot start: {exc}", err=True)
        sys.exit(1)
    frontend = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    app = create_app(session, frontend if frontend.is_dir() else None)
    uvicorn.run(app, host=host or config.host, port=port or config.port)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--store", "store_path", type=click.Path(exists=True, dir_okay=False), default=None)
def repl(config_path, store_path) -> None:
    """Terminal interaction loop with mock clients.

    Commands: w/a/d move and rotate, x section button, e environment button,
    v <text> voice command, state, quit.
    """
    config = _resolve_config(config_path, store_path, "mock", None)
    store = _load_store_file(config.store_path or default_store_path())
    session = Session(store, config, start_pose=parse_start_pose(config.start_pose))
    click.echo("cartassist repl; commands: w a d x e v <text> state quit")
    while True:
        try:
            line = click.prompt(">", prompt_suffix=" ", default="", show_default=False).strip()
        except (EOFError, click.Abort):
            break
        if not line:
            continue
        if line in ("quit", "exit", "q"):
            break
        if line == "state":
            click.echo(session.state_snapshot())
            continue
        if line in ("w", "a", "d"):
            command = {"w": Command.MOVE_FORWARD, "a": Command.ROTATE_LEFT, "d": Command.ROTATE_RIGHT}[line]
            result = session.step_cart(command)
            bump = " (bumped)" if result.bumped else ""
            click.echo(f"pose {result.pose.cell} {result.pose.heading.value}{bump}")
            continue
        if line == "x":
            record = session.press_button(ButtonVariant.SECTION_DESCRIPTION)
        elif line == "e":
            record = session.press_button(ButtonVariant.ENVIRONMENT_DESCRIPTION)
        elif line.startswith("v "):
            record = session.submit_utterance(line[2:].strip())
        else:
            click.echo("unknown command")
            continue
        for segment in record.segments:
            click.echo(f"assistant: {segment}")


if __name__ == "__main__":
    main()
