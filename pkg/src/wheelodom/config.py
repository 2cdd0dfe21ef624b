"""Minimal ``key = value`` config files.

Blank lines and ``#`` comments are ignored; ``:`` is accepted in place of
``=``.  Values are returned as stripped strings.
"""
from __future__ import annotations

import re
from pathlib import Path

from .errors import ParseError

_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_\-]*)\s*[=:]\s*(.*?)\s*$")


def read_keyvalue(path) -> dict[str, str]:
    path = Path(path)
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0]
            if not line.strip():
                continue
            m = _LINE.match(line)
            if m is None:
                raise ParseError(f"expected 'key = value', got {raw.strip()!r}", path, lineno)
            key = m.group(1).replace("-", "_")
            if key in out:
                raise ParseError(f"duplicate key {key!r}", path, lineno)
            out[key] = m.group(2)
    return out


def parse_floats(text, n, key="value"):
    """Parse exactly ``n`` numbers separated by commas and/or whitespace."""
    parts = [p for p in re.split(r"[,\s]+", text.strip().strip("[]()")) if p]
    if len(parts) != n:
        raise ValueError(f"{key}: expected {n} numbers, got {len(parts)}")
    return [float(p) for p in parts]
