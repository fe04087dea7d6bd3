"""AST node types for filter and order expressions, unbound and bound."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Union

from ..wire import Field

COMPARE_OPERATORS = ("=", "<>", "<", "<=", ">", ">=")
ORDERING_OPERATORS = frozenset({"<", "<=", ">", ">="})


@dataclass(frozen=True)
class FieldRef:
    column_name: str
    table_qualifier: Optional[str] = None

    def __str__(self):
        if self.table_qualifier:
            return f"{self.table_qualifier}.{self.column_name}"
        return self.column_name


@dataclass(frozen=True)
class Literal:
    kind: str  # integer | decimal | string | boolean | null
    value: Any


@dataclass(frozen=True)
class And:
    left: "FilterAst"
    right: "FilterAst"


@dataclass(frozen=True)
class Or:
    left: "FilterAst"
    right: "FilterAst"


@dataclass(frozen=True)
class Not:
    child: "FilterAst"


@dataclass(frozen=True)
class Compare:
    field: FieldRef
    operator: str
    literal: Literal


@dataclass(frozen=True)
class Like:
    field: FieldRef
    pattern: str


@dataclass(frozen=True)
class IsNull:
    field: FieldRef
    negated: bool = False


FilterAst = Union[And, Or, Not, Compare, Like, IsNull]


@dataclass(frozen=True)
class OrderItem:
    field: FieldRef
    descending: bool = False


@dataclass(frozen=True)
class OrderSpec:
    items: tuple = ()

    def __bool__(self):
        return bool(self.items)


# --- bound forms -----------------------------------------------------------
# Every column reference is resolved to an index into the planned field list;
# ``field`` is kept for diagnostics and SQL emission.


@dataclass(frozen=True)
class BoundCompare:
    index: int
    field: Field
    operator: str
    data_type: str
    value: Any  # literal decoded to the column's comparison domain
    literal: Literal


@dataclass(frozen=True)
class BoundLike:
    index: int
    field: Field
    pattern: str


@dataclass(frozen=True)
class BoundIsNull:
    index: int
    field: Field
    negated: bool = False


@dataclass(frozen=True)
class BoundAnd:
    left: "BoundFilter"
    right: "BoundFilter"


@dataclass(frozen=True)
class BoundOr:
    left: "BoundFilter"
    right: "BoundFilter"


@dataclass(frozen=True)
class BoundNot:
    child: "BoundFilter"


BoundFilter = Union[BoundAnd, BoundOr, BoundNot, BoundCompare, BoundLike, BoundIsNull]


@dataclass(frozen=True)
class BoundOrderItem:
    index: int
    field: Field
    data_type: str
    descending: bool = False


@dataclass(frozen=True)
class BoundOrder:
    items: tuple = ()
