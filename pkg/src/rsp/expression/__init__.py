"""Filter and order expression language: parse, bind, evaluate, emit SQL."""

from .binding import bind, bind_filter, bind_order, resolve
from .evaluate import compare_rows, eval_filter, like_regex
from .nodes import (
    And,
    BoundOrder,
    Compare,
    FieldRef,
    IsNull,
    Like,
    Literal,
    Not,
    Or,
    OrderItem,
    OrderSpec,
)
from .parser import parse_filter, parse_order, tokenize
from .printer import format_filter, format_order
from .sql import SqlFragment, to_parameterized_sql

__all__ = [
    "And",
    "BoundOrder",
    "Compare",
    "FieldRef",
    "IsNull",
    "Like",
    "Literal",
    "Not",
    "Or",
    "OrderItem",
    "OrderSpec",
    "SqlFragment",
    "bind",
    "bind_filter",
    "bind_order",
    "compare_rows",
    "eval_filter",
    "format_filter",
    "format_order",
    "like_regex",
    "parse_filter",
    "parse_order",
    "resolve",
    "to_parameterized_sql",
    "tokenize",
]
