"""Deterministic JSON emission.

Reports must be byte-identical across runs, so floats are always rendered
with 17 significant digits (enough to round-trip), keys are sorted, and
non-finite values map to the strings "inf" / "-inf" / "nan" (documented in
the schemas; standard JSON has no literals for them).
"""
from __future__ import annotations

import math
from fractions import Fraction

SCHEMA_VERSION = 1


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _emit(obj, parts: list, indent: int) -> None:
    pad = "  " * indent
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, Fraction):
        parts.append(_format_float(float(obj)))
    elif isinstance(obj, float):
        parts.append(_format_float(obj))
    elif isinstance(obj, str):
        escaped = (obj.replace("\\", "\\\\").replace('"', '\\"')
                   .replace("\n", "\\n").replace("\t", "\\t"))
        parts.append(f'"{escaped}"')
    elif isinstance(obj, (list, tuple)):
        if not obj:
            parts.append("[]")
            return
        parts.append("[\n")
        for j, item in enumerate(obj):
            parts.append("  " * (indent + 1))
            _emit(item, parts, indent + 1)
            parts.append(",\n" if j + 1 < len(obj) else "\n")
        parts.append(pad + "]")
    elif isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        keys = sorted(obj, key=str)
        for j, key in enumerate(keys):
            parts.append("  " * (indent + 1) + f'"{key}": ')
            _emit(obj[key], parts, indent + 1)
            parts.append(",\n" if j + 1 < len(keys) else "\n")
        parts.append(pad + "}")
    else:
        try:
            parts.append(_format_float(float(obj)))
        except (TypeError, ValueError):
            raise TypeError(f"cannot serialize {type(obj).__name__}") from None


def dumps(obj) -> str:
    parts: list = []
    _emit(obj, parts, 0)
    parts.append("\n")
    return "".join(parts)
