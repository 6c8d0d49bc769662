"""Deterministic JSON emission: sorted keys, floats at 17 significant digits,
line-delimited records."""

from __future__ import annotations

import json
import math
from typing import Any


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float {x!r} cannot be serialized")
    return format(x, ".17g")


def dumps17(obj: Any) -> str:
    """JSON text with every float at 17 significant digits and sorted keys."""
    if isinstance(obj, dict):
        items = sorted(obj.items())
        inner = ",".join(f"{json.dumps(str(k))}:{dumps17(v)}" for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps17(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, (int, str)) or obj is None:
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_records(path: str, records: list[dict]) -> None:
    """One JSON object per line."""
    with open(path, "w", newline="\n") as fh:
        for rec in records:
            fh.write(dumps17(rec))
            fh.write("\n")


def read_records(path: str) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
