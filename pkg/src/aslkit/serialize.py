"""JSON forms of the core value types, plus canonical serialization helpers.

All on-disk and on-wire documents use these converters, so equality of
canonical JSON means semantic equality.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .analysis import AggPred, DemandReport, PresencePred, SlsRule, SlsRuleSet, RuleConfigError
from .resources import Kind, ResourceDemand, ResourceKind, ResourceSupply
from .sls import Dimension, Level, Polarity, SchemaError, SlsSchema


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# --- schema ----------------------------------------------------------------


def schema_to_json(schema: SlsSchema) -> dict:
    return {
        "dimensions": [
            {"name": d.name, "polarity": d.polarity.value} for d in schema.dimensions
        ]
    }


def schema_from_json(data: dict) -> SlsSchema:
    try:
        dims = tuple(
            Dimension(d["name"], Polarity.parse(d["polarity"]))
            for d in data["dimensions"]
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed schema document: {exc}") from exc
    return SlsSchema(dims)


def load_schema(path: str | Path) -> SlsSchema:
    return schema_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# --- resource profile ------------------------------------------------------


def profile_from_json(data: list) -> list[ResourceKind]:
    kinds = []
    for entry in data:
        kinds.append(
            ResourceKind(entry["name"], Kind(entry["kind"]), entry.get("unit", ""))
        )
    names = [k.name for k in kinds]
    if len(names) != len(set(names)):
        raise ValueError("duplicate resource names in profile")
    return kinds


def load_profile(path: str | Path) -> list[ResourceKind]:
    return profile_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# --- supply / demand -------------------------------------------------------


def supply_to_json(supply: ResourceSupply) -> dict:
    return {
        "quantities": dict(sorted(supply.quantities.items())),
        "capabilities": sorted(supply.capabilities),
    }


def supply_from_json(data: dict) -> ResourceSupply:
    return ResourceSupply(
        quantities=data.get("quantities", {}),
        capabilities=frozenset(data.get("capabilities", [])),
    )


def load_supply(path: str | Path) -> ResourceSupply:
    return supply_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def demand_to_json(demand: ResourceDemand) -> dict:
    return {
        "additive": dict(sorted(demand.additive.items())),
        "maximal": dict(sorted(demand.maximal.items())),
        "presence": sorted(demand.presence),
    }


def demand_from_json(data: dict) -> ResourceDemand:
    return ResourceDemand(
        additive=data.get("additive", {}),
        maximal=data.get("maximal", {}),
        presence=frozenset(data.get("presence", [])),
    )


def report_to_json(report: DemandReport) -> dict:
    return {
        "entry_points": {
            name: demand_to_json(d) for name, d in sorted(report.per_entry_point.items())
        },
        "presence_union": sorted(report.presence_union),
    }


def report_from_json(data: dict) -> DemandReport:
    per_entry = {
        name: demand_from_json(d) for name, d in data.get("entry_points", {}).items()
    }
    return DemandReport(per_entry, frozenset(data.get("presence_union", [])))


# --- SLS values ------------------------------------------------------------


def sls_to_json(sls) -> dict:
    return {name: level.label() for name, level in sorted(sls.items())}


def sls_from_json(data: dict) -> dict[str, Level]:
    return {name: Level.parse(text) for name, text in data.items()}


def load_sls(path: str | Path) -> dict[str, Level]:
    return sls_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# --- SLS derivation rules --------------------------------------------------


def rules_from_json(data: list, schema: SlsSchema) -> SlsRuleSet:
    rules = []
    for i, entry in enumerate(data):
        try:
            dimension = entry["dimension"]
            level = Level.parse(entry["level"])
            when = entry["when"]
        except (KeyError, TypeError) as exc:
            raise RuleConfigError(f"malformed rule #{i}: {exc}") from exc
        if when == "default":
            pred = None
        elif isinstance(when, dict) and "presence" in when:
            pred = PresencePred(when["presence"])
        elif isinstance(when, dict) and "agg" in when:
            agg = when["agg"]
            if agg.get("op") not in ("max", "sum") or agg.get("cmp") not in ("<=", ">"):
                raise RuleConfigError(f"malformed aggregate predicate in rule #{i}")
            pred = AggPred(agg["resource"], agg["op"], agg["cmp"], int(agg["value"]))
        else:
            raise RuleConfigError(f"malformed predicate in rule #{i}: {when!r}")
        rules.append(SlsRule(dimension, pred, level))
    return SlsRuleSet(tuple(rules), schema)


def load_rules(path: str | Path, schema: SlsSchema) -> SlsRuleSet:
    return rules_from_json(json.loads(Path(path).read_text(encoding="utf-8")), schema)
