"""Abstract resource analysis of program bodies under a binding.

The analysis is an exact worst-case interpretation: sequences sum additive
demand, `choose` joins branches worst-case, `repeat` scales, and calls inline
the callee's demand at each call site (adaptable callees resolve through the
binding).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .resources import (
    EMPTY_DEMAND,
    FitResult,
    ResourceDemand,
    ResourceSupply,
    branch_all,
    fits,
    scale,
    seq,
)
from .sls import SLS, Level, SlsSchema
from .syntax import (
    AdaptableProgram,
    Call,
    Choose,
    Consume,
    MethodDef,
    Repeat,
    Reserve,
    Stmt,
    Use,
)


class BindingError(ValueError):
    """A binding entry is missing, or names an alternative that does not apply."""


EMPTY_BINDING_KEY = "plain"


@dataclass(frozen=True)
class Binding:
    """Total assignment of adaptable methods to defining alternatives."""

    assignments: Mapping[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    def alternative_for(self, class_name: str, method: str) -> str:
        try:
            return self.assignments[(class_name, method)]
        except KeyError:
            raise BindingError(f"no binding for adaptable method {class_name}.{method}") from None

    def key(self) -> str:
        """Canonical string form, usable as a stable identifier."""
        if not self.assignments:
            return EMPTY_BINDING_KEY
        parts = [
            f"{cls}.{method}={alt}"
            for (cls, method), alt in sorted(self.assignments.items())
        ]
        return ",".join(parts)

    @classmethod
    def parse(cls, text: str) -> "Binding":
        text = text.strip()
        if not text or text == EMPTY_BINDING_KEY:
            return cls({})
        assignments = {}
        for part in text.split(","):
            lhs, _, alt = part.partition("=")
            clsname, _, method = lhs.partition(".")
            if not (clsname and method and alt):
                raise BindingError(f"malformed binding entry {part!r}")
            assignments[(clsname.strip(), method.strip())] = alt.strip()
        return cls(assignments)

    def check(self, program: AdaptableProgram) -> None:
        """Validate totality and applicability against a program."""
        declared = set(program.adaptable_method_names())
        bound = set(self.assignments)
        missing = declared - bound
        if missing:
            names = ", ".join(f"{c}.{m}" for c, m in sorted(missing))
            raise BindingError(f"binding does not cover: {names}")
        extra = bound - declared
        if extra:
            names = ", ".join(f"{c}.{m}" for c, m in sorted(extra))
            raise BindingError(f"binding covers unknown methods: {names}")
        alts = {a.name: a for a in program.alternatives}
        for (clsname, method), alt_name in sorted(self.assignments.items()):
            alt = alts.get(alt_name)
            if alt is None or alt.adapts != clsname or not alt.defines(method):
                raise BindingError(
                    f"alternative {alt_name!r} does not define {clsname}.{method}"
                )


@dataclass(frozen=True)
class DemandReport:
    """Per-entry-point demand of one adaptation, plus the aggregate presence set."""

    per_entry_point: Mapping[str, ResourceDemand]
    presence_union: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "per_entry_point", dict(self.per_entry_point))

    def fits(self, supply: ResourceSupply) -> FitResult:
        """An adaptation fits iff every entry point individually fits."""
        failures = []
        ok = True
        for name in sorted(self.per_entry_point):
            result = fits(self.per_entry_point[name], supply)
            if not result:
                ok = False
                failures.extend(result.failures)
        return FitResult(ok, tuple(failures))


class _Analyzer:
    def __init__(self, program: AdaptableProgram, binding: Binding):
        self.program = program
        self.binding = binding
        self._cache: dict[tuple[str, str], ResourceDemand] = {}
        self._alts = {a.name: a for a in program.alternatives}

    def method_demand(self, class_name: str, method: str) -> ResourceDemand:
        key = (class_name, method)
        if key not in self._cache:
            self._cache[key] = self.body_demand(self._resolve(class_name, method).body)
        return self._cache[key]

    def _resolve(self, class_name: str, method: str) -> MethodDef:
        cls = self.program.find_class(class_name)
        if cls is None:
            raise BindingError(f"unknown class {class_name!r}")
        if hasattr(cls, "methods"):  # plain class
            for m in cls.methods:
                if m.name == method:
                    return m
            raise BindingError(f"unknown method {class_name}.{method}")
        for m in cls.plain_methods:
            if m.name == method:
                return m
        for sig in cls.adaptable_methods:
            if sig.name == method:
                alt_name = self.binding.alternative_for(class_name, method)
                alt = self._alts.get(alt_name)
                if alt is None or alt.adapts != class_name or not alt.defines(method):
                    raise BindingError(
                        f"alternative {alt_name!r} does not define {class_name}.{method}"
                    )
                return alt.method_def(method)
        raise BindingError(f"unknown method {class_name}.{method}")

    def body_demand(self, stmts: tuple[Stmt, ...]) -> ResourceDemand:
        demand = EMPTY_DEMAND
        for stmt in stmts:
            demand = seq(demand, self.stmt_demand(stmt))
        return demand

    def stmt_demand(self, stmt: Stmt) -> ResourceDemand:
        if isinstance(stmt, Use):
            return ResourceDemand(presence=frozenset({stmt.resource}))
        if isinstance(stmt, Consume):
            return ResourceDemand(additive={stmt.resource: stmt.amount})
        if isinstance(stmt, Reserve):
            return ResourceDemand(maximal={stmt.resource: stmt.amount})
        if isinstance(stmt, Call):
            return self.method_demand(stmt.class_name, stmt.method)
        if isinstance(stmt, Repeat):
            return scale(stmt.count, self.body_demand(stmt.body))
        if isinstance(stmt, Choose):
            return branch_all(self.body_demand(block) for block in stmt.branches)
        raise TypeError(f"unknown statement {stmt!r}")


def analyze_method(
    program: AdaptableProgram, binding: Binding, class_name: str, method: str
) -> ResourceDemand:
    """Exact worst-case resource demand of one method under a binding."""
    return _Analyzer(program, binding).method_demand(class_name, method)


def default_entry_points(program: AdaptableProgram) -> list[str]:
    """The invokable surface: all adaptable methods, plus `main` if present."""
    entries = [f"{c}.{m}" for c, m in program.adaptable_method_names()]
    for c, m in program.all_method_names():
        if m == "main" and f"{c}.{m}" not in entries:
            entries.append(f"{c}.{m}")
    return sorted(entries)


def analyze_adaptation(
    program: AdaptableProgram,
    binding: Binding,
    entry_points: list[str] | None = None,
) -> DemandReport:
    """Demand report over the program's entry points for one binding.

    ``entry_points`` overrides the default surface; this is how a tailored
    (plain) program is re-analyzed against its original entry points.
    """
    if entry_points is None:
        entry_points = default_entry_points(program)
    analyzer = _Analyzer(program, binding)
    per_entry: dict[str, ResourceDemand] = {}
    for qualified in entry_points:
        cls, _, method = qualified.partition(".")
        per_entry[qualified] = analyzer.method_demand(cls, method)
    union = frozenset().union(*(d.presence for d in per_entry.values())) if per_entry else frozenset()
    return DemandReport(per_entry, union)


# --- Offered-SLS derivation rules -----------------------------------------


class RuleConfigError(ValueError):
    """The rule set is malformed or does not cover the schema."""


@dataclass(frozen=True)
class PresencePred:
    resource: str


@dataclass(frozen=True)
class AggPred:
    resource: str
    op: str  # "max" | "sum" over entry points
    cmp: str  # "<=" | ">"
    value: int


@dataclass(frozen=True)
class SlsRule:
    dimension: str
    when: PresencePred | AggPred | None  # None is the terminal default
    level: Level


@dataclass(frozen=True)
class SlsRuleSet:
    """Ordered first-match rules deriving an offered SLS from a demand report."""

    rules: tuple[SlsRule, ...]
    schema: SlsSchema

    def __post_init__(self):
        for rule in self.rules:
            if rule.dimension not in self.schema:
                raise RuleConfigError(f"rule for unknown dimension {rule.dimension!r}")
        for name in self.schema.names:
            if not any(r.dimension == name and r.when is None for r in self.rules):
                raise RuleConfigError(f"dimension {name!r} has no default rule")


def _entry_value(demand: ResourceDemand, resource: str) -> int:
    # A resource has one kind, so at most one of these maps holds it.
    return demand.additive.get(resource, 0) + demand.maximal.get(resource, 0)


def _predicate_holds(pred, report: DemandReport) -> bool:
    if isinstance(pred, PresencePred):
        return pred.resource in report.presence_union
    if isinstance(pred, AggPred):
        values = [_entry_value(d, pred.resource) for d in report.per_entry_point.values()]
        agg = max(values, default=0) if pred.op == "max" else sum(values)
        return agg <= pred.value if pred.cmp == "<=" else agg > pred.value
    raise TypeError(f"unknown predicate {pred!r}")


def derive_offered_sls(report: DemandReport, rules: SlsRuleSet) -> dict[str, Level]:
    """First matching rule per dimension; defaults guarantee totality."""
    out: dict[str, Level] = {}
    for name in rules.schema.names:
        for rule in rules.rules:
            if rule.dimension != name:
                continue
            if rule.when is None or _predicate_holds(rule.when, report):
                out[name] = rule.level
                break
    return out
