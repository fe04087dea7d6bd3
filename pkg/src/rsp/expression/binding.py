"""Name and type resolution of parsed expressions against a planned field list."""

from __future__ import annotations

from decimal import Decimal
from typing import Optional, Sequence

from ..cells import STRING_TYPES, parse_cell
from ..errors import BadExpression, UnknownField
from ..wire import Field
from .nodes import (
    ORDERING_OPERATORS,
    And,
    BoundAnd,
    BoundCompare,
    BoundIsNull,
    BoundLike,
    BoundNot,
    BoundOr,
    BoundOrder,
    BoundOrderItem,
    Compare,
    FieldRef,
    IsNull,
    Like,
    Not,
    Or,
    OrderSpec,
)

ORDERABLE_TYPES = frozenset({"int", "long", "decimal", "datetime", "varchar", "text"})

# column data type -> literal kinds it accepts
_LITERAL_COMPAT = {
    "int": {"integer"},
    "long": {"integer"},
    "decimal": {"decimal", "integer"},
    "varchar": {"string"},
    "text": {"string"},
    "datetime": {"string"},
    "boolean": {"boolean"},
}


def resolve(ref: FieldRef, fields: Sequence[Field]) -> int:
    """Index of the field ``ref`` names.

    Unqualified names see only the base (non-joined) columns; ``Table.Column``
    matches any planned field with that table and name, joined ones included.
    """
    if ref.table_qualifier is None:
        matches = [i for i, f in enumerate(fields) if not f.is_joined and f.name == ref.column_name]
    else:
        matches = [
            i for i, f in enumerate(fields) if f.table == ref.table_qualifier and f.name == ref.column_name
        ]
    if not matches:
        raise UnknownField(f"unknown field {ref}")
    if len(matches) > 1:
        # A self-join yields base and joined fields with the same table and
        # name; the qualified name then means the base column.
        base = [i for i in matches if not fields[i].is_joined]
        if len(base) == 1:
            return base[0]
        raise UnknownField(f"ambiguous field {ref}")
    return matches[0]


def _bind_literal(field: Field, operator: str, literal):
    data_type = field.data_type
    if literal.kind not in _LITERAL_COMPAT.get(data_type, ()):
        raise BadExpression(f"{literal.kind} literal cannot be compared with {data_type} field {field.id}")
    if operator in ORDERING_OPERATORS and data_type not in ORDERABLE_TYPES:
        raise BadExpression(f"operator {operator} is not defined for {data_type} field {field.id}")
    if data_type == "datetime":
        try:
            return parse_cell("datetime", literal.value)
        except ValueError:
            raise BadExpression(f"{literal.value!r} is not a datetime (YYYY-MM-DDTHH:MM:SSZ)") from None
    if data_type == "decimal":
        return Decimal(literal.value)
    return literal.value


def bind_filter(ast, fields: Sequence[Field]):
    """Resolve and type-check a filter AST; ``None`` (match all) binds to ``None``."""
    if ast is None:
        return None
    if isinstance(ast, And):
        return BoundAnd(bind_filter(ast.left, fields), bind_filter(ast.right, fields))
    if isinstance(ast, Or):
        return BoundOr(bind_filter(ast.left, fields), bind_filter(ast.right, fields))
    if isinstance(ast, Not):
        return BoundNot(bind_filter(ast.child, fields))
    index = resolve(ast.field, fields)
    field = fields[index]
    if isinstance(ast, Compare):
        value = _bind_literal(field, ast.operator, ast.literal)
        return BoundCompare(index, field, ast.operator, field.data_type, value, ast.literal)
    if isinstance(ast, Like):
        if field.data_type not in STRING_TYPES:
            raise BadExpression(f"LIKE is not defined for {field.data_type} field {field.id}")
        return BoundLike(index, field, ast.pattern)
    if isinstance(ast, IsNull):
        return BoundIsNull(index, field, ast.negated)
    raise TypeError(f"not a filter node: {ast!r}")


def bind_order(spec: Optional[OrderSpec], fields: Sequence[Field]) -> BoundOrder:
    if not spec:
        return BoundOrder()
    items = []
    seen = set()
    for item in spec.items:
        index = resolve(item.field, fields)
        if index in seen:
            raise BadExpression(f"duplicate order column {item.field}")
        seen.add(index)
        items.append(BoundOrderItem(index, fields[index], fields[index].data_type, item.descending))
    return BoundOrder(tuple(items))


def bind(ast, fields: Sequence[Field]):
    """Bind either a filter AST or an :class:`OrderSpec`."""
    if isinstance(ast, OrderSpec):
        return bind_order(ast, fields)
    return bind_filter(ast, fields)
