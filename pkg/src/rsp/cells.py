"""Canonical string encodings for cell values.

All row data travels as strings (or null).  Each canonical data type has
exactly one textual form per value, so string equality of two valid cells
implies value equality for the key types (int, long).
"""

from __future__ import annotations

import re
from datetime import datetime, timezone
from decimal import Decimal

DATA_TYPES = ("int", "long", "decimal", "varchar", "text", "boolean", "datetime")
INTEGER_TYPES = frozenset({"int", "long"})
NUMERIC_TYPES = frozenset({"int", "long", "decimal"})
STRING_TYPES = frozenset({"varchar", "text"})

_INTEGER_RE = re.compile(r"-?(0|[1-9][0-9]*)")
_DECIMAL_RE = re.compile(r"-?(0|[1-9][0-9]*)(\.[0-9]+)?")
_DATETIME_RE = re.compile(r"[0-9]{4}-[0-9]{2}-[0-9]{2}T[0-9]{2}:[0-9]{2}:[0-9]{2}Z")
_DATETIME_FORMAT = "%Y-%m-%dT%H:%M:%SZ"

_INT_BOUNDS = {"int": (-(2**31), 2**31 - 1), "long": (-(2**63), 2**63 - 1)}


def parse_cell(data_type: str, text: str):
    """Decode a non-null cell into a comparable Python value.

    Raises ValueError when ``text`` is not the canonical encoding.
    """
    if data_type in INTEGER_TYPES:
        if not _INTEGER_RE.fullmatch(text) or text == "-0":
            raise ValueError(f"{text!r} is not a canonical {data_type}")
        value = int(text)
        low, high = _INT_BOUNDS[data_type]
        if not low <= value <= high:
            raise ValueError(f"{text!r} is out of range for {data_type}")
        return value
    if data_type == "decimal":
        if not _DECIMAL_RE.fullmatch(text):
            raise ValueError(f"{text!r} is not a canonical decimal")
        return Decimal(text)
    if data_type in STRING_TYPES:
        return text
    if data_type == "boolean":
        if text == "true":
            return True
        if text == "false":
            return False
        raise ValueError(f"{text!r} is not a canonical boolean")
    if data_type == "datetime":
        if not _DATETIME_RE.fullmatch(text):
            raise ValueError(f"{text!r} is not a canonical datetime")
        return datetime.strptime(text, _DATETIME_FORMAT).replace(tzinfo=timezone.utc)
    raise ValueError(f"unknown data type {data_type!r}")


def format_cell(data_type: str, value) -> str:
    """Inverse of :func:`parse_cell`."""
    if data_type in INTEGER_TYPES:
        return str(int(value))
    if data_type == "decimal":
        text = format(Decimal(value), "f")
        return "0" if text == "-0" else text
    if data_type == "boolean":
        return "true" if value else "false"
    if data_type == "datetime":
        return value.astimezone(timezone.utc).strftime(_DATETIME_FORMAT)
    return str(value)


def is_canonical(data_type: str, text: str) -> bool:
    try:
        parse_cell(data_type, text)
    except ValueError:
        return False
    return True
