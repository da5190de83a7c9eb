"""Semantic validation of parsed programs: coverage, resolution, acyclicity."""
from __future__ import annotations

from .syntax import (
    AdaptableProgram,
    Call,
    Choose,
    Diagnostic,
    MethodDef,
    Repeat,
    Span,
    Stmt,
)

from .resources import Kind, ResourceKind

E001 = "E001_UNCOVERED_METHOD"
E002 = "E002_UNKNOWN_ADAPTS_TARGET"
E003 = "E003_SIGNATURE_MISMATCH"
E004 = "E004_DUPLICATE_DEFINITION"
E005 = "E005_UNRESOLVED_CALL"
E006 = "E006_CALL_CYCLE"


def _err(code: str, message: str, span: Span) -> Diagnostic:
    return Diagnostic("error", code, message, span)


def _calls_in(stmts: tuple[Stmt, ...]):
    for stmt in stmts:
        if isinstance(stmt, Call):
            yield stmt
        elif isinstance(stmt, Repeat):
            yield from _calls_in(stmt.body)
        elif isinstance(stmt, Choose):
            for block in stmt.branches:
                yield from _calls_in(block)


def validate(program: AdaptableProgram) -> list[Diagnostic]:
    """Check all program invariants; empty result means the program is valid."""
    diags: list[Diagnostic] = []

    # Class and alternative name uniqueness.
    seen_classes: dict[str, Span] = {}
    for cls in list(program.plain_classes) + list(program.adaptable_classes):
        if cls.name in seen_classes:
            diags.append(_err(E004, f"duplicate class name {cls.name!r}", cls.span))
        seen_classes[cls.name] = cls.span
    seen_alts: set[str] = set()
    for alt in program.alternatives:
        if alt.name in seen_alts:
            diags.append(_err(E004, f"duplicate alternative name {alt.name!r}", alt.span))
        seen_alts.add(alt.name)

    adaptable_by_name = {cls.name: cls for cls in program.adaptable_classes}

    # Per-class method uniqueness.
    for cls in program.plain_classes:
        _check_method_dups(cls.name, [m.name for m in cls.methods], cls.span, diags)
    for cls in program.adaptable_classes:
        names = [s.name for s in cls.adaptable_methods] + [m.name for m in cls.plain_methods]
        _check_method_dups(cls.name, names, cls.span, diags)

    # Alternatives: target exists, signatures match, no duplicate definitions.
    for alt in program.alternatives:
        target = adaptable_by_name.get(alt.adapts)
        if target is None:
            diags.append(
                _err(E002, f"alternative {alt.name!r} adapts unknown class {alt.adapts!r}", alt.span)
            )
            continue
        declared = {s.name for s in target.adaptable_methods}
        seen: set[str] = set()
        for mdef in alt.methods:
            if mdef.name in seen:
                diags.append(
                    _err(
                        E004,
                        f"alternative {alt.name!r} defines {mdef.name!r} twice",
                        mdef.span,
                    )
                )
            seen.add(mdef.name)
            if mdef.name not in declared:
                diags.append(
                    _err(
                        E003,
                        f"alternative {alt.name!r} defines {mdef.name!r}, which is not an "
                        f"adaptable method of {alt.adapts!r}",
                        mdef.span,
                    )
                )

    # Coverage: every adaptable method has at least one defining alternative.
    for cls in program.adaptable_classes:
        alts = program.alternatives_for(cls.name)
        for sig in cls.adaptable_methods:
            if not any(a.defines(sig.name) for a in alts):
                diags.append(
                    _err(
                        E001,
                        f"adaptable method {cls.name}.{sig.name} has no defining alternative",
                        sig.span,
                    )
                )

    diags.extend(_check_calls(program))
    diags.sort(key=lambda d: (d.span.line, d.span.column, d.code))
    return diags


def _check_method_dups(cls_name: str, names: list[str], span: Span, diags: list[Diagnostic]):
    seen: set[str] = set()
    for name in names:
        if name in seen:
            diags.append(_err(E004, f"class {cls_name!r} declares {name!r} twice", span))
        seen.add(name)


def _method_table(program: AdaptableProgram):
    """(class, method) -> "plain" | "adaptable", considering all declarations."""
    table: dict[tuple[str, str], str] = {}
    for cls in program.plain_classes:
        for m in cls.methods:
            table[(cls.name, m.name)] = "plain"
    for cls in program.adaptable_classes:
        for s in cls.adaptable_methods:
            table[(cls.name, s.name)] = "adaptable"
        for m in cls.plain_methods:
            table[(cls.name, m.name)] = "plain"
    return table


def _definition_nodes(program: AdaptableProgram):
    """All method definitions as (node-id, body) pairs.

    Plain methods get node id "C.m"; alternative definitions get "Alt::C.m".
    """
    for cls in program.plain_classes:
        for m in cls.methods:
            yield f"{cls.name}.{m.name}", (cls.name, m.name), m
    for cls in program.adaptable_classes:
        for m in cls.plain_methods:
            yield f"{cls.name}.{m.name}", (cls.name, m.name), m
    for alt in program.alternatives:
        for m in alt.methods:
            yield f"{alt.name}::{alt.adapts}.{m.name}", (alt.adapts, m.name), m


def _check_calls(program: AdaptableProgram) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    table = _method_table(program)

    # Resolution of every call site.
    for _node_id, _target, mdef in _definition_nodes(program):
        for call in _calls_in(mdef.body):
            if (call.class_name, call.method) not in table:
                diags.append(
                    _err(
                        E005,
                        f"call targets unknown method {call.class_name}.{call.method}",
                        call.span,
                    )
                )

    # Call graph edges; a call to an adaptable method may reach any alternative
    # defining it, so the graph is conservative over bindings.
    defs_for: dict[tuple[str, str], list[str]] = {}
    bodies: dict[str, MethodDef] = {}
    for node_id, key, mdef in _definition_nodes(program):
        defs_for.setdefault(key, []).append(node_id)
        bodies[node_id] = mdef

    edges: dict[str, list[str]] = {node: [] for node in bodies}
    for node_id, mdef in bodies.items():
        for call in _calls_in(mdef.body):
            key = (call.class_name, call.method)
            if key in table:
                edges[node_id].extend(defs_for.get(key, []))

    cycle = _find_cycle(edges)
    if cycle:
        pretty = " -> ".join(cycle)
        span = bodies[cycle[0]].span
        diags.append(_err(E006, f"call cycle: {pretty}", span))
    return diags


def _find_cycle(edges: dict[str, list[str]]) -> list[str] | None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {node: WHITE for node in edges}
    parent: dict[str, str] = {}
    for root in sorted(edges):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(sorted(edges[root])))]
        color[root] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for succ in it:
                if color[succ] == GREY:
                    # Reconstruct the cycle succ -> ... -> node -> succ.
                    cycle = [node]
                    cur = node
                    while cur != succ:
                        cur = parent[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    cycle.append(succ)
                    return cycle
                if color[succ] == WHITE:
                    color[succ] = GREY
                    parent[succ] = node
                    stack.append((succ, iter(sorted(edges[succ]))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


E007 = "E007_KIND_CONFLICT"


def _resource_usages(program: AdaptableProgram):
    from .syntax import Consume, Reserve, Use

    def walk(stmts):
        for stmt in stmts:
            if isinstance(stmt, Use):
                yield stmt.resource, Kind.PRESENCE, stmt.span
            elif isinstance(stmt, Consume):
                yield stmt.resource, Kind.ADDITIVE, stmt.span
            elif isinstance(stmt, Reserve):
                yield stmt.resource, Kind.MAXIMAL, stmt.span
            elif isinstance(stmt, Repeat):
                yield from walk(stmt.body)
            elif isinstance(stmt, Choose):
                for block in stmt.branches:
                    yield from walk(block)

    for _node_id, _key, mdef in _definition_nodes(program):
        yield from walk(mdef.body)


def resource_kind_conflicts(
    program: AdaptableProgram, profile: list[ResourceKind]
) -> list[Diagnostic]:
    """Check resource usage against a profile: kind per name is fixed."""
    declared = {k.name: k.kind for k in profile}
    seen: dict[str, Kind] = {}
    diags: list[Diagnostic] = []
    for name, kind, span in _resource_usages(program):
        expected = declared.get(name)
        if expected is None:
            diags.append(
                Diagnostic("warning", E007, f"resource {name!r} not in profile", span)
            )
        elif expected is not kind:
            diags.append(
                _err(
                    E007,
                    f"resource {name!r} is {expected.value} in the profile but used as {kind.value}",
                    span,
                )
            )
        prior = seen.setdefault(name, kind)
        if prior is not kind:
            diags.append(
                _err(
                    E007,
                    f"resource {name!r} used with conflicting kinds "
                    f"({prior.value} and {kind.value})",
                    span,
                )
            )
    return diags
