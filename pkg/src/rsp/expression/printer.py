"""Canonical text form of filter/order ASTs (re-parses to an equal AST)."""

from __future__ import annotations

from decimal import Decimal

from .nodes import And, Compare, IsNull, Like, Literal, Not, Or, OrderSpec


def quote_string(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def format_literal(literal: Literal) -> str:
    if literal.kind == "string":
        return quote_string(literal.value)
    if literal.kind == "boolean":
        return "TRUE" if literal.value else "FALSE"
    if literal.kind == "decimal":
        text = format(Decimal(literal.value), "f")
        return text if "." in text else text + ".0"
    if literal.kind == "null":
        return "NULL"
    return str(literal.value)


def format_filter(node) -> str:
    if node is None:
        return ""
    if isinstance(node, And):
        return f"({format_filter(node.left)} AND {format_filter(node.right)})"
    if isinstance(node, Or):
        return f"({format_filter(node.left)} OR {format_filter(node.right)})"
    if isinstance(node, Not):
        return f"NOT {format_filter(node.child)}"
    if isinstance(node, Compare):
        return f"{node.field} {node.operator} {format_literal(node.literal)}"
    if isinstance(node, Like):
        return f"{node.field} LIKE {quote_string(node.pattern)}"
    if isinstance(node, IsNull):
        return f"{node.field} IS {'NOT ' if node.negated else ''}NULL"
    raise TypeError(f"not a filter node: {node!r}")


def format_order(spec: OrderSpec) -> str:
    return ", ".join(f"{item.field} {'DESC' if item.descending else 'ASC'}" for item in spec.items)
