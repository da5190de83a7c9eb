#!/usr/bin/env python3
"""Run the full provider/consumer flow against a temporary registry store.

Publishes the Connection service from the corpus, discovers it with a
WiFi-only supply and an ambitious request, relaxes until agreement, then
deploys the delivered artifact locally.
"""
import argparse
import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from aslkit.client import LocalTransport, RelaxByPriority, deploy, run_discovery
from aslkit.customize import build_descriptor
from aslkit.parser import parse
from aslkit.registry.core import Registry
from aslkit.serialize import load_rules, load_schema, load_supply, supply_to_json
from aslkit.validate import validate


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus", default=str(ROOT / "corpus"), help="corpus directory")
    ap.add_argument("--requested", default='{"Cost": "Low"}', help="requested SLS as JSON")
    args = ap.parse_args()

    corpus = Path(args.corpus)
    schema = load_schema(corpus / "schema.json")
    rules = load_rules(corpus / "rules.json", schema)
    supply = load_supply(corpus / "supply_wifi.json")
    program = parse((corpus / "connection.asl").read_text(encoding="utf-8"))
    assert validate(program) == [], "corpus program must validate"

    descriptor = build_descriptor(program, schema, rules)
    print(f"descriptor: {len(descriptor.alternatives)} alternative(s)")
    for alt in descriptor.alternatives:
        offered = {k: v.label() for k, v in alt.offered_sls.items()}
        print(f"  {alt.alternative_key}: {offered}")

    with tempfile.TemporaryDirectory() as tmp:
        registry = Registry(Path(tmp) / "store")
        service_id = registry.publish(descriptor.to_json())
        print(f"published as {service_id}")

        result = run_discovery(
            LocalTransport(registry),
            program.name,
            supply_to_json(supply),
            json.loads(args.requested),
            RelaxByPriority(priority=tuple(schema.names)),
            schema,
            transcript_path=Path(tmp) / "transcript.jsonl",
        )
        print(f"negotiation: {result.status}")
        for entry in result.transcript:
            print(f"  round {entry['round']}: {entry['received']['outcome']} -> {entry['decision']}")
        if result.status != "agreed":
            print(f"  reason: {result.reason}")
            return 1

        print(f"sla {result.sla['sla_id']}: terms {result.sla['terms']}")
        path = deploy(result.artifact, supply, Path(tmp) / "deployed", sla=result.sla)
        print(f"deployed {path.name} ({len(result.artifact)} bytes)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
