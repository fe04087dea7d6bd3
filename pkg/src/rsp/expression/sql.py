"""Parameterized SQL emission for bound filters.

Literals never reach the template: each one becomes a ``?`` placeholder.
Every comparison is guarded with ``IS NOT NULL`` so SQL's unknown collapses
to false, matching :func:`rsp.expression.evaluate.eval_filter`.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

from ..wire import Field
from .nodes import BoundAnd, BoundCompare, BoundIsNull, BoundLike, BoundNot, BoundOr

PLACEHOLDER = "?"


@dataclass(frozen=True)
class SqlFragment:
    template: str
    params: tuple = ()


def quote_identifier(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


def column_sql(field: Field) -> str:
    # Joined display columns are addressed through their table name.
    if field.is_joined:
        return f"{quote_identifier(field.table)}.{quote_identifier(field.name)}"
    return quote_identifier(field.name)


def _param(node: BoundCompare):
    kind = node.literal.kind
    if kind == "decimal" or node.data_type == "decimal":
        return Decimal(node.literal.value)
    return node.literal.value


def _emit(node, params: list) -> str:
    if isinstance(node, BoundAnd):
        return f"({_emit(node.left, params)} AND {_emit(node.right, params)})"
    if isinstance(node, BoundOr):
        return f"({_emit(node.left, params)} OR {_emit(node.right, params)})"
    if isinstance(node, BoundNot):
        return f"(NOT {_emit(node.child, params)})"
    column = column_sql(node.field)
    if isinstance(node, BoundIsNull):
        return f"{column} IS {'NOT ' if node.negated else ''}NULL"
    if isinstance(node, BoundCompare):
        params.append(_param(node))
        return f"({column} {node.operator} {PLACEHOLDER} AND {column} IS NOT NULL)"
    if isinstance(node, BoundLike):
        params.append(node.pattern)
        return f"({column} LIKE {PLACEHOLDER} AND {column} IS NOT NULL)"
    raise TypeError(f"not a bound filter node: {node!r}")


def to_parameterized_sql(node) -> SqlFragment:
    """SQL boolean expression for ``node``; ``None`` (match all) becomes ``1 = 1``."""
    if node is None:
        return SqlFragment("1 = 1", ())
    params: list = []
    template = _emit(node, params)
    return SqlFragment(template, tuple(params))
