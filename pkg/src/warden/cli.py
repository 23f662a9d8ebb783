"""Operator command line: serve the gateway, seed data, drive syncs and
training, print reports, and run the live-adaptation demo.

Every command except simulate works in-process against the data
directory, so no server is needed for seeding, syncing, or training.
Exit codes: 0 success, 1 user error, 2 internal error.
"""

from __future__ import annotations

import json
import signal
import sys
import threading
import time
from pathlib import Path
from typing import Optional

import click
import httpx

from .config import ConfigError, WardenConfig, load_config, parse_duration
from .evaluation import render_report_text
from .fixtures import fixture_path, synthetic_records
from .records import ValidationError
from .runtime import Runtime, build_components
from .warehouse import Warehouse
from .watcher import PatternReport

_CONFIG_OPT = click.option(
    "--config", "config_path", type=click.Path(path_type=Path), default=None, help="TOML config file."
)
_DATA_DIR_OPT = click.option(
    "--data-dir", type=click.Path(path_type=Path), default=None, help="Data directory override."
)


def _load(config_path: Optional[Path], data_dir: Optional[Path]) -> WardenConfig:
    return load_config(path=config_path, data_dir=data_dir)


@click.group()
def cli() -> None:
    """Secure data-mining gateway service."""


@cli.command()
@_CONFIG_OPT
@_DATA_DIR_OPT
def serve(config_path: Optional[Path], data_dir: Optional[Path]) -> None:
    """Run the gateway with its scheduler, worker, and watcher."""
    config = _load(config_path, data_dir)
    runtime = Runtime(config)
    runtime.start()
    click.echo(f"serving on {runtime.base_url} (data dir {config.data_dir})")
    stop = threading.Event()

    def handle_signal(signum, frame) -> None:
        stop.set()

    signal.signal(signal.SIGINT, handle_signal)
    signal.signal(signal.SIGTERM, handle_signal)
    try:
        while not stop.is_set():
            stop.wait(0.2)
    finally:
        runtime.stop()
        click.echo("stopped")


@cli.command()
@_CONFIG_OPT
@_DATA_DIR_OPT
@click.option(
    "--fixture",
    type=click.Path(path_type=Path),
    default=None,
    help="CSV to load; defaults to the bundled sample dataset.",
)
def seed(config_path: Optional[Path], data_dir: Optional[Path], fixture: Optional[Path]) -> None:
    """Load a fixture CSV into the warehouse."""
    config = _load(config_path, data_dir)
    source = fixture if fixture is not None else fixture_path()
    config.data_dir.mkdir(parents=True, exist_ok=True)
    warehouse = Warehouse(config.data_dir / "warehouse.log")
    try:
        count = warehouse.seed_from_fixture(source)
    except (FileNotFoundError, ValidationError) as exc:
        raise click.ClickException(str(exc)) from None
    click.echo(f"seeded {count} records")


@cli.command("sync-once")
@_CONFIG_OPT
@_DATA_DIR_OPT
def sync_once(config_path: Optional[Path], data_dir: Optional[Path]) -> None:
    """Run a single change-capture pass from warehouse to sink."""
    config = _load(config_path, data_dir)
    _, _, pipeline, _ = build_components(config)
    result = pipeline.run_sync()
    if result.error is not None:
        raise click.ClickException(result.error)
    click.echo(f"applied {result.applied} changes (cursor at {result.new_cursor.last_applied_version})")


@cli.command()
@_CONFIG_OPT
@_DATA_DIR_OPT
def train(config_path: Optional[Path], data_dir: Optional[Path]) -> None:
    """Retrain on the current sink snapshot and persist a pattern report."""
    config = _load(config_path, data_dir)
    _, sink, _, watcher = build_components(config)
    if not sink.initialized():
        raise click.ClickException("sink is empty; run seed and sync-once first")
    report = watcher.train_now()
    if not report.trainable:
        raise click.ClickException(
            f"report {report.id}: data not trainable (needs both classes); previous model kept"
        )
    click.echo(
        f"report {report.id}: accuracy {report.report.accuracy:.4f}, "
        f"forest {report.forest_accuracy:.4f}, digest {report.model_digest[:12]}"
    )


def _print_report(report: PatternReport, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(report.as_dict(), sort_keys=True))
        return
    click.echo(f"pattern report {report.id} (revision {report.data_revision}, {report.trained_at})")
    if report.report is None:
        click.echo("untrainable snapshot; previous model kept")
        return
    click.echo(render_report_text(report.report), nl=False)
    click.echo(f"forest accuracy: {report.forest_accuracy}")
    click.echo(f"model digest: {report.model_digest}")
    click.echo(f"changed from previous: {report.changed_from_previous}")


@cli.command()
@_CONFIG_OPT
@_DATA_DIR_OPT
@click.option("--id", "report_id", type=int, default=None, help="Report id; defaults to the latest trained.")
@click.option("--json", "as_json", is_flag=True, help="Emit the full report as JSON.")
def report(config_path: Optional[Path], data_dir: Optional[Path], report_id: Optional[int], as_json: bool) -> None:
    """Print a pattern report (default: the latest trained one)."""
    config = _load(config_path, data_dir)
    _, _, _, watcher = build_components(config)
    if report_id is not None:
        chosen = watcher.get_report(report_id)
        if chosen is None:
            raise click.ClickException(f"no report with id {report_id}")
    else:
        chosen = watcher.latest_trained()
        if chosen is None:
            raise click.ClickException("no reports")
    _print_report(chosen, as_json)


@cli.command()
@_CONFIG_OPT
@_DATA_DIR_OPT
@click.option("--inserts", type=int, default=50, show_default=True, help="Synthetic records to insert.")
@click.option("--interval", default="50ms", show_default=True, help="Delay between inserts.")
@click.option("--timeout", "timeout_s", type=float, default=60.0, show_default=True, help="Seconds to wait for a new report.")
@click.option("--seed", "gen_seed", type=int, default=7, show_default=True, help="Generator seed for the synthetic records.")
def simulate(
    config_path: Optional[Path],
    data_dir: Optional[Path],
    inserts: int,
    interval: str,
    timeout_s: float,
    gen_seed: int,
) -> None:
    """Insert synthetic customers against a running service and wait for
    the watcher to publish a new pattern report."""
    config = _load(config_path, data_dir)
    if inserts < 0:
        raise click.ClickException("--inserts must be non-negative")
    delay = parse_duration(interval, "--interval")
    base_url = f"http://{'127.0.0.1' if config.bind_host in ('0.0.0.0', '::') else config.bind_host}:{config.bind_port}"
    if not config.api_keys:
        raise click.ClickException("an API key is required (config api_keys or WARDEN_API_KEY)")
    headers = {"X-API-Key": config.api_keys[0]}

    def latest_report() -> Optional[dict]:
        response = httpx.get(f"{base_url}/model/report", headers=headers, timeout=10.0)
        if response.status_code == 404:
            return None
        response.raise_for_status()
        return response.json()

    try:
        before = latest_report()
    except httpx.HTTPError as exc:
        raise click.ClickException(f"service not reachable at {base_url}: {exc}") from None
    before_id = before["id"] if before else 0
    before_acc = before["report"]["accuracy"] if before else None
    click.echo(f"before: report {before_id}" + (f", accuracy {before_acc}" if before_acc is not None else ""))

    warehouse = Warehouse(config.data_dir / "warehouse.log")
    base_id = 16000000 + gen_seed * 10000
    for record in synthetic_records(inserts, seed=gen_seed, start_user_id=base_id):
        warehouse.upsert_record(record)
        if delay > 0:
            time.sleep(delay)
    click.echo(f"inserted {inserts} records")

    if inserts == 0:
        click.echo("no inserts, not expecting a new report")
        return
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        current = latest_report()
        if current is not None and current["id"] > before_id:
            click.echo(
                f"after: report {current['id']} (revision {current['data_revision']}), "
                f"accuracy {current['report']['accuracy']}"
            )
            change = current["delta"]["accuracy_change"]
            click.echo(f"accuracy change: {change:+.4f}, structure changed: {current['delta']['structure_changed']}")
            return
        time.sleep(0.2)
    raise click.ClickException(f"no new pattern report within {timeout_s:.0f}s")


def main(argv: Optional[list[str]] = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (ConfigError, ValidationError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except Exception as exc:  # internal fault
        click.echo(f"internal error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
