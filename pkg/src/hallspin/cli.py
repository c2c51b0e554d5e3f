"""Command-line client for the simulation service.

By default commands run against an in-process instance of the service (no
server needed); pass ``--server URL`` to talk to a remote one instead. Exit
codes: 0 success, 2 validation failure, 3 compile non-convergence, 1
internal error.
"""

from __future__ import annotations

import json
import sys
from typing import Any, Optional

import click
import httpx

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2
EXIT_UNCONVERGED = 3


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=httpx.Timeout(600.0))
    import warnings

    with warnings.catch_warnings():
        # starlette's in-process client warns about the httpx major version;
        # plain httpx works and is what this environment ships
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        click.echo(f"error: file not found: {path}", err=True)
        sys.exit(EXIT_VALIDATION)
    except json.JSONDecodeError as exc:
        click.echo(f"error: {path} is not valid JSON: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _dump(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _write_output(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        click.echo(text, nl=False)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _post(server: Optional[str], endpoint: str, body: dict) -> dict:
    try:
        with _client(server) as client:
            response = client.post(endpoint, json=body)
    except httpx.HTTPError as exc:
        click.echo(f"error: request failed: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)
    if response.status_code in (400, 422):
        payload = response.json()
        diags = payload.get("diagnostics") or [json.dumps(payload.get("detail"))]
        for d in diags:
            click.echo(f"validation: {d}", err=True)
        sys.exit(EXIT_VALIDATION)
    if response.status_code != 200:
        click.echo(f"error: service returned {response.status_code}: {response.text}", err=True)
        sys.exit(EXIT_INTERNAL)
    return response.json()


@click.group()
def main() -> None:
    """Pulse-level nuclear-spin-chain simulator and gate compiler."""


@main.command()
@click.argument("chain_file", type=click.Path())
@click.argument("program_file", type=click.Path())
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--readout-error", type=float, default=0.0, show_default=True)
@click.option("--t1", type=float, default=None, help="T1 relaxation time in seconds.")
@click.option("--emit-state", is_flag=True, help="Include final-state amplitudes in the result.")
@click.option("-o", "--output", default=None, help="Result file path (default: stdout).")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
def simulate(chain_file, program_file, seed, readout_error, t1, emit_state, output, server):
    """Run a program file on a chain file and write the result document."""
    body = {
        "chain": _load_json(chain_file),
        "program": _load_json(program_file),
        "seed": seed,
        "readout_error": readout_error,
        "t1_seconds": t1,
        "emit_state": emit_state,
    }
    result = _post(server, "/simulate", body)
    _write_output(_dump(result), output)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("chain_file", type=click.Path())
@click.option("--target", type=click.Choice(["iswap", "cnot", "swap", "idle"]), required=True)
@click.option("--qubits", nargs=2, type=int, default=(0, 1), show_default=True)
@click.option("--tau", type=float, default=None, help="Idle duration in seconds (idle target).")
@click.option("--budget", type=int, default=None, help="Cap on objective evaluations.")
@click.option("--restarts", type=int, default=None, help="Cap on optimizer restarts.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", default="program.json", show_default=True,
              help="Where to write the synthesized program.")
@click.option("--report", default=None, help="Optional path for the fidelity report JSON.")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
def compile(chain_file, target, qubits, tau, budget, restarts, seed, output, report, server):
    """Synthesize a gate program for the chain; exits 3 if not converged."""
    body = {
        "chain": _load_json(chain_file),
        "target": target,
        "qubits": list(qubits),
        "tau_seconds": tau,
        "budget_evaluations": budget,
        "restarts": restarts,
        "seed": seed,
    }
    result = _post(server, "/compile", body)
    _write_output(_dump(result["program"]), output)
    report_doc = {k: v for k, v in result.items() if k != "program"}
    report_text = _dump(report_doc)
    if report:
        _write_output(report_text, report)
    click.echo(report_text, nl=False)
    sys.exit(EXIT_OK if result["converged"] else EXIT_UNCONVERGED)


@main.command()
@click.argument("chain_file", type=click.Path())
@click.argument("program_file", type=click.Path())
@click.option("--observable", default="0", show_default=True,
              help="Comma-separated qubit indices; the observable is their sigma_z product.")
@click.option("--replicas", type=int, default=1, show_default=True)
@click.option("--readout", type=click.Choice(["expectation", "majority"]),
              default="expectation", show_default=True)
@click.option("--position-jitter", type=float, default=0.0, show_default=True,
              help="Per-spin position jitter sigma in nm.")
@click.option("--coupling-sigma", type=float, default=0.0, show_default=True,
              help="Replica coupling-scale spread.")
@click.option("--readout-error", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", default=None, help="Report path (default: stdout).")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
def ensemble(chain_file, program_file, observable, replicas, readout, position_jitter,
             coupling_sigma, readout_error, seed, output, server):
    """Run the program on replica chains and report ensemble statistics."""
    try:
        qubits = [int(tok) for tok in observable.split(",") if tok.strip() != ""]
    except ValueError:
        click.echo(f"error: bad --observable {observable!r}, expected comma-separated ints",
                   err=True)
        sys.exit(EXIT_VALIDATION)
    if not qubits:
        click.echo("error: --observable needs at least one qubit index", err=True)
        sys.exit(EXIT_VALIDATION)
    body = {
        "chain": _load_json(chain_file),
        "program": _load_json(program_file),
        "observable": qubits,
        "replicas": replicas,
        "readout": readout,
        "position_jitter_sigma": position_jitter,
        "coupling_scale_sigma": coupling_sigma,
        "readout_error": readout_error,
        "seed": seed,
    }
    result = _post(server, "/ensemble", body)
    _write_output(_dump(result), output)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("chain_file", type=click.Path())
@click.argument("program_file", type=click.Path())
@click.option("--param", type=click.Choice(["field", "spacing", "coupling-sigma"]), required=True)
@click.option("--range", "range_", required=True, metavar="A:B:STEPS",
              help="Sweep range, e.g. 1.0:8.0:15.")
@click.option("--observable", default="0", show_default=True,
              help="Comma-separated qubit indices; the observable is their sigma_z product.")
@click.option("--replicas", type=int, default=1, show_default=True)
@click.option("--readout-error", type=float, default=0.0, show_default=True)
@click.option("--position-jitter", type=float, default=0.0, show_default=True,
              help="Per-spin position jitter sigma in nm.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", default=None, help="CSV path (default: stdout).")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
def sweep(chain_file, program_file, param, range_, observable, replicas, readout_error,
          position_jitter, seed, output, server):
    """Sweep a parameter and report ensemble statistics as CSV."""
    try:
        start_s, stop_s, steps_s = range_.split(":")
        start, stop, steps = float(start_s), float(stop_s), int(steps_s)
    except ValueError:
        click.echo(f"error: bad --range syntax {range_!r}, expected A:B:STEPS", err=True)
        sys.exit(EXIT_VALIDATION)
    try:
        qubits = [int(tok) for tok in observable.split(",") if tok.strip() != ""]
    except ValueError:
        click.echo(f"error: bad --observable {observable!r}, expected comma-separated ints",
                   err=True)
        sys.exit(EXIT_VALIDATION)
    if not qubits:
        click.echo("error: --observable needs at least one qubit index", err=True)
        sys.exit(EXIT_VALIDATION)
    body = {
        "chain": _load_json(chain_file),
        "program": _load_json(program_file),
        "param": param,
        "start": start,
        "stop": stop,
        "steps": steps,
        "observable": qubits,
        "replicas": replicas,
        "position_jitter_sigma": position_jitter,
        "readout_error": readout_error,
        "seed": seed,
    }
    result = _post(server, "/sweep", body)
    _write_output(result["csv"], output)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("hallspin.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
