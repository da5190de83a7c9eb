"""Command-line surface for the whole toolchain.

Exit codes: 0 success, 2 validation error, 3 no fit / no agreement,
4 integrity error, 5 network error.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import client as client_mod
from .analysis import Binding, BindingError, analyze_adaptation, derive_offered_sls
from .customize import (
    DEFAULT_BINDING_CAP,
    EnumerationCapError,
    build_descriptor,
    enumerate_bindings,
    tailor,
)
from .parser import ParseError, parse
from .registry.core import Registry
from .serialize import (
    load_profile,
    load_rules,
    load_schema,
    load_sls,
    load_supply,
    report_to_json,
    sls_to_json,
    supply_to_json,
)
from .validate import resource_kind_conflicts, validate

EXIT_VALIDATION = 2
EXIT_NO_FIT = 3
EXIT_INTEGRITY = 4
EXIT_NETWORK = 5


def _load_program(path: str):
    source = Path(path).read_text(encoding="utf-8")
    try:
        program = parse(source)
    except ParseError as exc:
        for diag in exc.diagnostics:
            click.echo(diag.format(path), err=True)
        sys.exit(EXIT_VALIDATION)
    diags = validate(program)
    for diag in diags:
        click.echo(diag.format(path), err=True)
    if any(d.severity == "error" for d in diags):
        sys.exit(EXIT_VALIDATION)
    return program


def _parse_binding(text: str, program) -> Binding:
    try:
        binding = Binding.parse(text)
        binding.check(program)
        return binding
    except BindingError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


@click.group()
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None, help="SLS schema JSON file.")
@click.option("--profile", "profile_path", type=click.Path(exists=True), default=None, help="Resource profile JSON file.")
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None, help="Offered-SLS derivation rules JSON file.")
@click.option("--registry", "registry_url", default=None, help="Registry base URL.")
@click.option("--json", "json_output", is_flag=True, help="Machine-readable output.")
@click.pass_context
def main(ctx, schema_path, profile_path, rules_path, registry_url, json_output):
    """Tooling for adaptable services: frontend, analysis, customization, registry, client."""
    ctx.obj = {
        "schema_path": schema_path,
        "profile_path": profile_path,
        "rules_path": rules_path,
        "registry_url": registry_url,
        "json": json_output,
    }


def _require(ctx, key: str, flag: str):
    value = ctx.obj.get(key)
    if value is None:
        click.echo(f"error: {flag} is required for this command", err=True)
        sys.exit(EXIT_VALIDATION)
    return value


def _schema(ctx):
    return load_schema(_require(ctx, "schema_path", "--schema"))


def _rules(ctx, schema):
    return load_rules(_require(ctx, "rules_path", "--rules"), schema)


@main.command()
@click.argument("source", type=click.Path(exists=True))
@click.pass_context
def check(ctx, source):
    """Parse and validate an ASL source file."""
    program = _load_program(source)
    if ctx.obj["profile_path"]:
        profile = load_profile(ctx.obj["profile_path"])
        conflicts = resource_kind_conflicts(program, profile)
        for diag in conflicts:
            click.echo(diag.format(source), err=True)
        if any(d.severity == "error" for d in conflicts):
            sys.exit(EXIT_VALIDATION)
    click.echo(f"{source}: ok")


@main.command()
@click.argument("source", type=click.Path(exists=True))
@click.option("--binding", "binding_text", default="plain", help="Binding key, e.g. C.m=Alt,C.n=Alt.")
@click.pass_context
def analyze(ctx, source, binding_text):
    """Compute the per-entry-point resource demand report for one binding."""
    program = _load_program(source)
    binding = _parse_binding(binding_text, program)
    report = analyze_adaptation(program, binding)
    out = {"binding": binding.key(), "report": report_to_json(report)}
    if ctx.obj["schema_path"] and ctx.obj["rules_path"]:
        schema = _schema(ctx)
        out["offered_sls"] = sls_to_json(derive_offered_sls(report, _rules(ctx, schema)))
    click.echo(json.dumps(out, indent=None if ctx.obj["json"] else 2, sort_keys=True))


@main.command()
@click.argument("source", type=click.Path(exists=True))
@click.option("--cap", default=DEFAULT_BINDING_CAP, show_default=True, help="Binding enumeration cap.")
@click.pass_context
def enumerate(ctx, source, cap):
    """List every binding of the adaptation space in canonical order."""
    program = _load_program(source)
    try:
        bindings = enumerate_bindings(program, cap=cap)
    except EnumerationCapError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    if ctx.obj["json"]:
        click.echo(json.dumps([b.key() for b in bindings]))
    else:
        for b in bindings:
            click.echo(b.key())


@main.command("tailor")
@click.argument("source", type=click.Path(exists=True))
@click.option("--binding", "binding_text", required=True)
@click.option("-o", "--output", type=click.Path(), default=None)
@click.pass_context
def tailor_cmd(ctx, source, binding_text, output):
    """Emit the plain program for one binding."""
    program = _load_program(source)
    binding = _parse_binding(binding_text, program)
    tailored = tailor(program, binding)
    if output:
        Path(output).write_text(tailored.source, encoding="utf-8")
        click.echo(f"{output}: sha256 {tailored.digest}")
    else:
        click.echo(tailored.source, nl=False)


@main.command()
@click.argument("source", type=click.Path(exists=True))
@click.option("--no-prune", is_flag=True, help="Publish all bindings, dominated ones included.")
@click.option("--cap", default=DEFAULT_BINDING_CAP, show_default=True)
@click.option("--provider", default="", help="Provider name recorded in the descriptor.")
@click.option("-o", "--output", type=click.Path(), default=None)
@click.pass_context
def descriptor(ctx, source, no_prune, cap, provider, output):
    """Build the extended service descriptor for publication."""
    program = _load_program(source)
    schema = _schema(ctx)
    rules = _rules(ctx, schema)
    try:
        desc = build_descriptor(
            program,
            schema,
            rules,
            provider={"name": provider} if provider else {},
            prune=not no_prune,
            cap=cap,
        )
    except EnumerationCapError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    text = desc.canonical()
    if output:
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"{output}: {len(desc.alternatives)} alternative(s)")
    else:
        click.echo(text)


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8470, show_default=True)
def serve(store_dir, host, port):
    """Run the registry HTTP service."""
    import uvicorn

    from .registry.http import create_app

    registry = Registry(store_dir)
    uvicorn.run(create_app(registry), host=host, port=port)


@main.command()
@click.argument("descriptor_file", type=click.Path(exists=True))
@click.pass_context
def publish(ctx, descriptor_file):
    """Publish a descriptor to the registry."""
    transport = client_mod.HttpTransport(_require(ctx, "registry_url", "--registry"))
    doc = json.loads(Path(descriptor_file).read_text(encoding="utf-8"))
    try:
        response = transport._check(transport.client.post("/services", json=doc)).json()
    except client_mod.ProtocolError as exc:
        click.echo(f"error[{exc.code}]: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except client_mod.NetworkError as exc:
        click.echo(f"network error: {exc}", err=True)
        sys.exit(EXIT_NETWORK)
    click.echo(response["service_id"])


@main.command()
@click.option("--functionality", required=True)
@click.option("--supply", "supply_path", required=True, type=click.Path(exists=True))
@click.option("--requested", "requested_path", required=True, type=click.Path(exists=True))
@click.option(
    "--policy",
    type=click.Choice(["accept-first", "abort", "relax"]),
    default="accept-first",
    show_default=True,
)
@click.option("--priority", default="", help="Comma-separated dimensions for the relax policy.")
@click.option("--max-rounds", default=8, show_default=True)
@click.option("--transcript", "transcript_path", type=click.Path(), default=None)
@click.option("--deploy-dir", type=click.Path(), default=None, help="Deploy the artifact here on success.")
@click.pass_context
def discover(ctx, functionality, supply_path, requested_path, policy, priority, max_rounds, transcript_path, deploy_dir):
    """Negotiate with the registry; optionally deploy the agreed artifact."""
    schema = _schema(ctx)
    supply = load_supply(supply_path)
    requested = load_sls(requested_path)
    if policy == "accept-first":
        policy_obj = client_mod.AcceptFirstFeasible()
    elif policy == "abort":
        policy_obj = client_mod.AbortOnMismatch()
    else:
        dims = tuple(p for p in priority.split(",") if p)
        policy_obj = client_mod.RelaxByPriority(dims, max_rounds=max_rounds)
    transport = client_mod.HttpTransport(_require(ctx, "registry_url", "--registry"))
    try:
        result = client_mod.run_discovery(
            transport,
            functionality,
            supply_to_json(supply),
            sls_to_json(requested),
            policy_obj,
            schema,
            transcript_path=transcript_path,
        )
    except client_mod.IntegrityError as exc:
        click.echo(f"integrity error: {exc}", err=True)
        sys.exit(EXIT_INTEGRITY)
    except client_mod.NetworkError as exc:
        click.echo(f"network error: {exc}", err=True)
        sys.exit(EXIT_NETWORK)
    if result.status != "agreed":
        click.echo(json.dumps({"status": result.status, "reason": result.reason}))
        sys.exit(EXIT_NO_FIT)
    summary = {"status": "agreed", "sla": result.sla}
    if deploy_dir:
        try:
            path = client_mod.deploy(result.artifact, supply, deploy_dir, sla=result.sla)
        except client_mod.DeploymentRefused as exc:
            click.echo(f"deployment refused: {exc}", err=True)
            sys.exit(EXIT_NO_FIT)
        summary["deployed"] = str(path)
    click.echo(json.dumps(summary, sort_keys=True))


@main.command()
@click.argument("artifact", type=click.Path(exists=True))
@click.option("--supply", "supply_path", required=True, type=click.Path(exists=True))
@click.option("--dest", required=True, type=click.Path())
@click.option("--sla", "sla_path", type=click.Path(exists=True), default=None)
def deploy(artifact, supply_path, dest, sla_path):
    """Locally verify and install a tailored artifact."""
    supply = load_supply(supply_path)
    data = Path(artifact).read_bytes()
    sla = json.loads(Path(sla_path).read_text(encoding="utf-8")) if sla_path else None
    try:
        path = client_mod.deploy(data, supply, dest, sla=sla)
    except client_mod.DeploymentRefused as exc:
        click.echo(f"deployment refused: {exc}", err=True)
        sys.exit(EXIT_NO_FIT)
    except client_mod.ClientError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo(str(path))


if __name__ == "__main__":
    main()
