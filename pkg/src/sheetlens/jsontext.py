"""Canonical JSON writing.

The stdlib encoder cannot emit Decimal values as plain JSON numbers, and the
report contract requires byte-identical output for equal inputs, so this
small writer owns the exact byte shape: keys in insertion order, compact
separators, ASCII-escaped strings, decimals rendered with their exact text.
"""

from __future__ import annotations

import json
from decimal import Decimal


def dumps(value: object) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValueError(f"cannot serialize non-finite decimal {value}")
        return str(value)
    if isinstance(value, float):
        raise TypeError("floats are not serialized; use Decimal for exact text")
    if isinstance(value, dict):
        parts = (f"{json.dumps(k)}:{dumps(v)}" for k, v in value.items())
        return "{" + ",".join(parts) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")
