"""Binding enumeration, dominance pruning, tailoring and descriptor assembly."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .analysis import (
    Binding,
    DemandReport,
    SlsRuleSet,
    analyze_adaptation,
    default_entry_points,
    derive_offered_sls,
)
from .pretty import format_program
from .serialize import (
    canonical_json,
    demand_to_json,
    report_to_json,
    schema_to_json,
    sha256_hex,
    sls_to_json,
)
from .sls import Level, Polarity, SlsSchema
from .syntax import AdaptableProgram, ClassDecl, MethodDef

DEFAULT_BINDING_CAP = 4096


class EnumerationCapError(RuntimeError):
    """The adaptation space exceeds the configured cap."""

    def __init__(self, count: int, cap: int):
        super().__init__(
            f"adaptation space has {count} bindings, exceeding the cap of {cap}; "
            f"raise the cap explicitly to proceed"
        )
        self.count = count
        self.cap = cap


def enumerate_bindings(program: AdaptableProgram, cap: int = DEFAULT_BINDING_CAP) -> list[Binding]:
    """Full cross product over adaptable methods of their defining alternatives.

    Canonical order: methods sorted by (class, name), alternatives by name,
    lexicographic product. A program with no adaptable methods yields exactly
    one empty binding.
    """
    methods = program.adaptable_method_names()
    choices: list[list[str]] = []
    for cls, method in methods:
        alts = sorted(a.name for a in program.alternatives_for(cls) if a.defines(method))
        choices.append(alts)
    count = 1
    for alts in choices:
        count *= len(alts)
    if count > cap:
        raise EnumerationCapError(count, cap)
    bindings = []
    for combo in itertools.product(*choices):
        bindings.append(Binding(dict(zip(methods, combo))))
    return bindings


@dataclass(frozen=True)
class Candidate:
    binding: Binding
    report: DemandReport
    offered_sls: dict[str, Level]


def _sls_at_least_as_good(b: dict, a: dict, schema: SlsSchema) -> tuple[bool, bool]:
    """(b >= a in every dimension, b > a in some dimension) per polarity."""
    ge, strict = True, False
    for dim in schema.dimensions:
        bv, av = b[dim.name], a[dim.name]
        better = int(bv) - int(av)
        if dim.polarity is Polarity.LOWER_BETTER:
            better = -better
        if better < 0:
            ge = False
        elif better > 0:
            strict = True
    return ge, strict


def _demand_leq(b: DemandReport, a: DemandReport) -> tuple[bool, bool]:
    le, strict = True, False
    for name, bd in b.per_entry_point.items():
        ad = a.per_entry_point[name]
        if not bd.leq(ad):
            le = False
        elif bd != ad:
            strict = True
    return le, strict


def dominates(b: Candidate, a: Candidate, schema: SlsSchema) -> bool:
    """True iff b is at least as good as a everywhere and strictly better somewhere."""
    d_le, d_strict = _demand_leq(b.report, a.report)
    if not d_le:
        return False
    s_ge, s_strict = _sls_at_least_as_good(b.offered_sls, a.offered_sls, schema)
    if not s_ge:
        return False
    return d_strict or s_strict


def prune_dominated(candidates: list[Candidate], schema: SlsSchema) -> list[Candidate]:
    """Drop candidates dominated by another; survivors keep their order."""
    survivors = []
    for a in candidates:
        if not any(b is not a and dominates(b, a, schema) for b in candidates):
            survivors.append(a)
    return survivors


@dataclass(frozen=True)
class TailoredProgram:
    """Plain-ASL emission of one binding, with provenance and content digest."""

    source: str
    binding: Binding
    entry_points: tuple[str, ...]
    digest: str

    @property
    def content(self) -> bytes:
        return self.source.encode("utf-8")


def tailor(program: AdaptableProgram, binding: Binding) -> TailoredProgram:
    """Resolve every adaptable method through the binding and emit plain ASL.

    Each adaptable class becomes a plain class whose adaptable methods carry
    the body of the bound alternative; alternatives disappear. Deterministic
    byte-for-byte for a given (program, binding).
    """
    binding.check(program)
    alts = {a.name: a for a in program.alternatives}
    new_plain = list(program.plain_classes)
    for cls in program.adaptable_classes:
        methods: list[MethodDef] = []
        for sig in cls.adaptable_methods:
            alt = alts[binding.alternative_for(cls.name, sig.name)]
            bound = alt.method_def(sig.name)
            methods.append(MethodDef(sig.name, bound.body, sig.span))
        methods.extend(cls.plain_methods)
        new_plain.append(ClassDecl(cls.name, tuple(methods), cls.span))
    plain_program = AdaptableProgram(
        name=program.name,
        plain_classes=tuple(new_plain),
        adaptable_classes=(),
        alternatives=(),
        span=program.span,
    )
    source = format_program(plain_program)
    return TailoredProgram(
        source=source,
        binding=binding,
        entry_points=tuple(default_entry_points(program)),
        digest=sha256_hex(source.encode("utf-8")),
    )


@dataclass(frozen=True)
class DescriptorAlternative:
    alternative_key: str
    offered_sls: dict[str, Level]
    demand_report: DemandReport
    artifact_digest: str
    artifact_source: str


@dataclass(frozen=True)
class ExtendedServiceDescriptor:
    """The published service description: functionality plus per-alternative SLS."""

    service: str
    entry_points: tuple[str, ...]
    schema: SlsSchema
    alternatives: tuple[DescriptorAlternative, ...]
    provider: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "service": self.service,
            "functionality": {
                "name": self.service,
                "entry_points": list(self.entry_points),
            },
            "schema": schema_to_json(self.schema),
            "provider": self.provider,
            "alternatives": [
                {
                    "alternative_key": alt.alternative_key,
                    "offered_sls": sls_to_json(alt.offered_sls),
                    "demand_report": report_to_json(alt.demand_report),
                    "artifact_digest": alt.artifact_digest,
                    "artifact": alt.artifact_source,
                }
                for alt in self.alternatives
            ],
        }

    def canonical(self) -> str:
        return canonical_json(self.to_json())


def build_descriptor(
    program: AdaptableProgram,
    schema: SlsSchema,
    rules: SlsRuleSet,
    provider: dict | None = None,
    prune: bool = True,
    cap: int = DEFAULT_BINDING_CAP,
) -> ExtendedServiceDescriptor:
    """Run the full customization pipeline and assemble the publishable descriptor.

    enumerate -> analyze -> derive offered SLS -> prune dominated -> tailor.
    """
    bindings = enumerate_bindings(program, cap=cap)
    candidates = []
    for binding in bindings:
        report = analyze_adaptation(program, binding)
        offered = derive_offered_sls(report, rules)
        candidates.append(Candidate(binding, report, offered))
    if prune:
        candidates = prune_dominated(candidates, schema)
    alternatives = []
    for cand in candidates:
        tailored = tailor(program, cand.binding)
        alternatives.append(
            DescriptorAlternative(
                alternative_key=cand.binding.key(),
                offered_sls=cand.offered_sls,
                demand_report=cand.report,
                artifact_digest=tailored.digest,
                artifact_source=tailored.source,
            )
        )
    return ExtendedServiceDescriptor(
        service=program.name or "service",
        entry_points=tuple(default_entry_points(program)),
        schema=schema,
        alternatives=tuple(alternatives),
        provider=provider or {},
    )
