"""Syntax-tree call extraction.

Walks a parsed module and reports every call whose callee is a bare name or
an unbroken dotted name chain (``math.sqrt``, ``a.b.c``). Calls through
subscripts, call results, literals, or lambdas have no name to report and
are skipped. Definitions bind names, they do not call them, so ``def`` and
``class`` statements contribute nothing by themselves.
"""

from __future__ import annotations

import ast


def extract_calls(source: str) -> list[dict]:
    """[{name, line}] for each named call, in source order.

    Raises SyntaxError when the source does not parse.
    """
    tree = ast.parse(source)
    calls = []
    for node in ast.walk(tree):
        if not isinstance(node, ast.Call):
            continue
        path = _dotted_path(node.func)
        if path is not None:
            calls.append((node.lineno, node.col_offset, path))
    calls.sort()
    return [{"name": path, "line": line} for line, _, path in calls]


def _dotted_path(expr: ast.expr) -> str | None:
    parts: list[str] = []
    while isinstance(expr, ast.Attribute):
        parts.append(expr.attr)
        expr = expr.value
    if isinstance(expr, ast.Name):
        parts.append(expr.id)
        return ".".join(reversed(parts))
    return None
