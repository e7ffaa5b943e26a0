"""Operator command line: run a case, verify a ledger, serve the API, run
the benchmark, list instances."""

from __future__ import annotations

import os
import sys
import tempfile

import click

from .bench import emit_report, run_bench, tier_calibration
from .errors import GovcoreError
from .ledger import verify_ledger_file
from .replay import replay_case
from .store import InstanceStore


@click.group()
def main():
    """Governed decision-execution substrate."""


@main.command()
@click.option("--domain", default="appeal", show_default=True,
              help="Domain short name (appeal) or a domain YAML filename.")
@click.option("--case", "case_id", required=True, help="Case id, e.g. A001.")
@click.option("--backend", default="scripted", show_default=True,
              type=click.Choice(["scripted"]))
@click.option("--data-dir", default=None, help="Fixture directory override.")
@click.option("--ledger-out", default=None, help="Write the ledger file here.")
@click.option("--instance-id", default=None)
def run(domain, case_id, backend, data_dir, ledger_out, instance_id):
    """Run one case through a domain and print `DISPOSITION TIER`."""
    del backend  # only the scripted backend is runnable from the CLI
    try:
        result, _ = replay_case(
            case_id,
            instance_id=instance_id,
            ledger_path=ledger_out,
            data_dir=data_dir,
        )
    except FileNotFoundError as exc:
        raise click.ClickException(f"unknown case or missing script: {exc}")
    except GovcoreError as exc:
        raise click.ClickException(str(exc))
    tier = result.tier.value if result.tier else "-"
    click.echo(f"{result.disposition or '-'} {tier}")
    if result.status not in ("completed", "suspended"):
        sys.exit(1)


@main.command("verify-ledger")
@click.argument("path", type=click.Path(exists=True))
@click.option("--legacy-genesis", is_flag=True,
              help="Accept the all-zeros chain seed on entry 0.")
def verify_ledger(path, legacy_genesis):
    """Verify a ledger file's hash chain."""
    verification = verify_ledger_file(path, legacy_genesis=legacy_genesis)
    if verification.chain_valid:
        click.echo(f"valid ({verification.entries_checked} entries)")
    else:
        click.echo(f"INVALID at index {verification.first_broken_index}")
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8040, show_default=True)
@click.option("--data-dir", default=None,
              help="Instance store directory (default: temp dir).")
def serve(host, port, data_dir):
    """Serve the REST/SSE API."""
    import uvicorn

    from .service import create_app

    directory = data_dir or os.path.join(tempfile.gettempdir(), "govcore-serve")
    os.makedirs(directory, exist_ok=True)
    app = create_app(directory)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--system", default="all", show_default=True,
              type=click.Choice(["all", "cc_scripted", "react", "plan_and_solve"]))
@click.option("--format", "fmt", default="text", show_default=True,
              type=click.Choice(["text", "json", "csv"]))
@click.option("--data-dir", default=None)
def bench(system, fmt, data_dir):
    """Replay the benchmark set and print the comparison report."""
    systems = (
        ["cc_scripted", "react", "plan_and_solve"] if system == "all" else [system]
    )
    try:
        results = [run_bench(s, data_dir=data_dir) for s in systems]
    except GovcoreError as exc:
        raise click.ClickException(str(exc))
    click.echo(emit_report(results, fmt))
    if fmt == "text":
        for result in results:
            if result.system == "cc_scripted":
                calibration = tier_calibration(result)
                for warning in calibration["warnings"]:
                    click.echo(f"calibration warning: {warning}")


@main.command("list")
@click.option("--data-dir", required=True)
def list_instances(data_dir):
    """List stored instances with status and tier."""
    store = InstanceStore(data_dir)
    try:
        for summary in store.list():
            click.echo(
                f"{summary['instance_id']}  {summary.get('case_id') or '-':6s} "
                f"{summary.get('status') or '-':10s} {summary.get('tier') or '-':10s} "
                f"{summary.get('disposition') or '-'}"
            )
    finally:
        store.close()


if __name__ == "__main__":
    main()
