"""AST node types, source spans and diagnostics for the adaptable service language."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    length: int


NO_SPAN = Span(0, 0, 0)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    span: Span = NO_SPAN

    def format(self, filename: str = "<input>") -> str:
        return (
            f"{filename}:{self.span.line}:{self.span.column}: "
            f"{self.severity}[{self.code}]: {self.message}"
        )


# Statement forms. Bodies are tuples of statements; blocks carry no span of
# their own, the introducing statement does.


@dataclass(frozen=True)
class Use:
    resource: str
    span: Span = NO_SPAN


@dataclass(frozen=True)
class Consume:
    resource: str
    amount: int
    span: Span = NO_SPAN


@dataclass(frozen=True)
class Reserve:
    resource: str
    amount: int
    span: Span = NO_SPAN


@dataclass(frozen=True)
class Call:
    class_name: str
    method: str
    span: Span = NO_SPAN


@dataclass(frozen=True)
class Repeat:
    count: int
    body: tuple["Stmt", ...]
    span: Span = NO_SPAN


@dataclass(frozen=True)
class Choose:
    branches: tuple[tuple["Stmt", ...], ...]  # two or more
    span: Span = NO_SPAN


Stmt = Union[Use, Consume, Reserve, Call, Repeat, Choose]


@dataclass(frozen=True)
class MethodSig:
    name: str
    span: Span = NO_SPAN


@dataclass(frozen=True)
class MethodDef:
    name: str
    body: tuple[Stmt, ...]
    span: Span = NO_SPAN


@dataclass(frozen=True)
class ClassDecl:
    name: str
    methods: tuple[MethodDef, ...]
    span: Span = NO_SPAN


@dataclass(frozen=True)
class AdaptableClassDecl:
    name: str
    adaptable_methods: tuple[MethodSig, ...]
    plain_methods: tuple[MethodDef, ...]
    span: Span = NO_SPAN


@dataclass(frozen=True)
class AlternativeDecl:
    name: str
    adapts: str
    methods: tuple[MethodDef, ...]
    span: Span = NO_SPAN

    def defines(self, method: str) -> bool:
        return any(m.name == method for m in self.methods)

    def method_def(self, method: str) -> MethodDef:
        for m in self.methods:
            if m.name == method:
                return m
        raise KeyError(method)


@dataclass(frozen=True)
class AdaptableProgram:
    """Parsed program: plain classes, adaptable classes and their alternatives."""

    name: str = ""
    plain_classes: tuple[ClassDecl, ...] = ()
    adaptable_classes: tuple[AdaptableClassDecl, ...] = ()
    alternatives: tuple[AlternativeDecl, ...] = ()
    span: Span = NO_SPAN

    def adaptable_method_names(self) -> list[tuple[str, str]]:
        """All (class, method) pairs declared adaptable, in canonical order."""
        return sorted(
            (cls.name, sig.name)
            for cls in self.adaptable_classes
            for sig in cls.adaptable_methods
        )

    def alternatives_for(self, class_name: str) -> list[AlternativeDecl]:
        return [a for a in self.alternatives if a.adapts == class_name]

    def find_class(self, name: str):
        for cls in self.plain_classes:
            if cls.name == name:
                return cls
        for cls in self.adaptable_classes:
            if cls.name == name:
                return cls
        return None

    def all_method_names(self) -> list[tuple[str, str]]:
        """Every (class, method) pair, plain and adaptable."""
        out = []
        for cls in self.plain_classes:
            out.extend((cls.name, m.name) for m in cls.methods)
        for cls in self.adaptable_classes:
            out.extend((cls.name, sig.name) for sig in cls.adaptable_methods)
            out.extend((cls.name, m.name) for m in cls.plain_methods)
        return sorted(out)

    def is_plain(self) -> bool:
        return not self.adaptable_classes and not self.alternatives


def structure(node):
    """Span-free structural view of an AST node, for structural comparison."""
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        parts = [type(node).__name__]
        for f in dataclasses.fields(node):
            if f.name == "span":
                continue
            parts.append(structure(getattr(node, f.name)))
        return tuple(parts)
    if isinstance(node, tuple):
        return tuple(structure(x) for x in node)
    return node
