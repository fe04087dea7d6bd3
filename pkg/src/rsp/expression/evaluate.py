"""Row-level evaluation of bound filters and orderings.

Null handling is two-valued: any comparison or LIKE against a null cell is
false, only IS [NOT] NULL observes nulls.
"""

from __future__ import annotations

import operator
import re
from functools import lru_cache
from typing import Optional, Sequence

from ..cells import parse_cell
from ..errors import CorruptCell
from .nodes import BoundAnd, BoundCompare, BoundIsNull, BoundLike, BoundNot, BoundOr, BoundOrder

_OPS = {
    "=": operator.eq,
    "<>": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


@lru_cache(maxsize=256)
def like_regex(pattern: str) -> re.Pattern:
    parts = []
    for ch in pattern:
        if ch == "%":
            parts.append(".*")
        elif ch == "_":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts), re.DOTALL)


def decode_cell(data_type: str, text: str, column: str = "?"):
    try:
        return parse_cell(data_type, text)
    except ValueError as exc:
        raise CorruptCell(f"column {column}: {exc}") from None


def eval_filter(node, row: Sequence[Optional[str]]) -> bool:
    if node is None:
        return True
    if isinstance(node, BoundAnd):
        return eval_filter(node.left, row) and eval_filter(node.right, row)
    if isinstance(node, BoundOr):
        return eval_filter(node.left, row) or eval_filter(node.right, row)
    if isinstance(node, BoundNot):
        return not eval_filter(node.child, row)
    cell = row[node.index]
    if isinstance(node, BoundIsNull):
        return (cell is not None) if node.negated else (cell is None)
    if cell is None:
        return False
    if isinstance(node, BoundCompare):
        value = decode_cell(node.data_type, cell, node.field.id)
        return _OPS[node.operator](value, node.value)
    if isinstance(node, BoundLike):
        decode_cell(node.field.data_type, cell, node.field.id)
        return like_regex(node.pattern).fullmatch(cell) is not None
    raise TypeError(f"not a bound filter node: {node!r}")


def compare_rows(order: BoundOrder, a: Sequence[Optional[str]], b: Sequence[Optional[str]]) -> int:
    """-1, 0 or 1.  Nulls sort first ascending and last descending."""
    for item in order.items:
        x, y = a[item.index], b[item.index]
        if x is None or y is None:
            result = (x is not None) - (y is not None)
        else:
            vx = decode_cell(item.data_type, x, item.field.id)
            vy = decode_cell(item.data_type, y, item.field.id)
            result = (vx > vy) - (vx < vy)
        if result:
            return -result if item.descending else result
    return 0
