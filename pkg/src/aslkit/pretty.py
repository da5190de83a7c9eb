"""Canonical pretty-printer; output is deterministic byte-for-byte."""
from __future__ import annotations

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

INDENT = "    "


def format_program(program: AdaptableProgram) -> str:
    chunks: list[str] = []
    if program.name:
        chunks.append(f"service {program.name};\n")
    for cls in program.adaptable_classes:
        lines = [f"adaptable class {cls.name} {{"]
        for sig in cls.adaptable_methods:
            lines.append(f"{INDENT}adaptable fn {sig.name}();")
        for m in cls.plain_methods:
            lines.extend(_format_method(m, 1))
        lines.append("}\n")
        chunks.append("\n".join(lines))
    for cls in program.plain_classes:
        lines = [f"class {cls.name} {{"]
        for m in cls.methods:
            lines.extend(_format_method(m, 1))
        lines.append("}\n")
        chunks.append("\n".join(lines))
    for alt in program.alternatives:
        lines = [f"alternative {alt.name} adapts {alt.adapts} {{"]
        for m in alt.methods:
            lines.extend(_format_method(m, 1))
        lines.append("}\n")
        chunks.append("\n".join(lines))
    return "\n".join(chunks)


def _format_method(method: MethodDef, depth: int) -> list[str]:
    pad = INDENT * depth
    lines = [f"{pad}fn {method.name}() {{"]
    for stmt in method.body:
        lines.extend(_format_stmt(stmt, depth + 1))
    lines.append(f"{pad}}}")
    return lines


def _format_stmt(stmt: Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(stmt, Use):
        return [f"{pad}use {stmt.resource};"]
    if isinstance(stmt, Consume):
        return [f"{pad}consume {stmt.resource} {stmt.amount};"]
    if isinstance(stmt, Reserve):
        return [f"{pad}reserve {stmt.resource} {stmt.amount};"]
    if isinstance(stmt, Call):
        return [f"{pad}call {stmt.class_name}.{stmt.method}();"]
    if isinstance(stmt, Repeat):
        lines = [f"{pad}repeat {stmt.count} {{"]
        for inner in stmt.body:
            lines.extend(_format_stmt(inner, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, Choose):
        lines = [f"{pad}choose {{"]
        for i, block in enumerate(stmt.branches):
            if i > 0:
                lines.append(f"{pad}}} or {{")
            for inner in block:
                lines.extend(_format_stmt(inner, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"unknown statement {stmt!r}")
