"""Shared ``key = value`` config parsing (blocks separated by blank lines).

Values are JSON where possible (``coords = ["S","V"]``, ``domain = [[0.5,2]]``,
``wbar = "exp(S)*V^(-2/3)"``); bare words fall back to plain strings.
Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import json

__all__ = ["parse_blocks", "parse_flat"]


def _parse_value(raw: str):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_blocks(text: str) -> list[dict]:
    """Parse blank-line-separated blocks of ``key = value`` lines."""
    blocks: list[dict] = []
    current: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            if current:
                blocks.append(current)
                current = {}
            continue
        if stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        current[key.strip()] = _parse_value(raw)
    if current:
        blocks.append(current)
    return blocks


def parse_flat(text: str) -> dict:
    """Parse a config file as a single flat mapping (blocks merged in order)."""
    merged: dict = {}
    for block in parse_blocks(text):
        merged.update(block)
    return merged
