"""Tokenizer and recursive-descent parser for filter and order expressions.

Filter grammar (keywords case-insensitive, precedence NOT > AND > OR)::

    expr       := or
    or         := and ("OR" and)*
    and        := not ("AND" not)*
    not        := "NOT" not | primary
    primary    := "(" expr ")" | comparison
    comparison := fieldref cmpop literal
                | fieldref "LIKE" string
                | fieldref "IS" ["NOT"] "NULL"
    fieldref   := ident ["." ident]
    cmpop      := "=" | "<>" | "<" | "<=" | ">" | ">="

Order grammar::

    orderlist  := item ("," item)*
    item       := fieldref ["ASC" | "DESC"]
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Optional

from ..errors import BadExpression
from .nodes import And, Compare, FieldRef, FilterAst, IsNull, Like, Literal, Not, Or, OrderItem, OrderSpec

KEYWORDS = frozenset({"AND", "OR", "NOT", "LIKE", "IS", "NULL", "TRUE", "FALSE", "ASC", "DESC"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>'(?:[^']|'')*')
  | (?P<number>-?[0-9]+(?:\.[0-9]+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><>|<=|>=|=|<|>)
  | (?P<punct>[(),.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INTEGER, DECIMAL, STRING, OP, a keyword, "(", ")", ",", ".", EOF
    text: str
    position: int
    value: object = None


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == "'":
                raise BadExpression("unterminated string literal", pos)
            raise BadExpression(f"unexpected character {text[pos]!r}", pos)
        group = m.lastgroup
        raw = m.group()
        if group == "string":
            tokens.append(Token("STRING", raw, pos, raw[1:-1].replace("''", "'")))
        elif group == "number":
            if "." in raw:
                tokens.append(Token("DECIMAL", raw, pos, Decimal(raw)))
            else:
                tokens.append(Token("INTEGER", raw, pos, int(raw)))
        elif group == "ident":
            upper = raw.upper()
            tokens.append(Token(upper if upper in KEYWORDS else "IDENT", raw, pos, raw))
        elif group == "op":
            tokens.append(Token("OP", raw, pos, raw))
        elif group == "punct":
            tokens.append(Token(raw, raw, pos, raw))
        pos = m.end()
    tokens.append(Token("EOF", "", len(text)))
    return tokens


MAX_NESTING = 200

_LITERAL_KINDS = frozenset({"INTEGER", "DECIMAL", "STRING", "TRUE", "FALSE", "NULL"})


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.depth = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, kind: str) -> Optional[Token]:
        if self.current.kind == kind:
            return self.advance()
        return None

    def expect(self, *kinds: str) -> Token:
        if self.current.kind in kinds:
            return self.advance()
        raise self.error(set(kinds))

    def error(self, expected) -> BadExpression:
        tok = self.current
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return BadExpression(f"unexpected {found}", tok.position, frozenset(expected))

    # filter ----------------------------------------------------------------

    def parse_or(self) -> FilterAst:
        node = self.parse_and()
        while self.accept("OR"):
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> FilterAst:
        node = self.parse_not()
        while self.accept("AND"):
            node = And(node, self.parse_not())
        return node

    def nest(self):
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise BadExpression("expression nested too deeply", self.current.position)

    def parse_not(self) -> FilterAst:
        if self.accept("NOT"):
            self.nest()
            node = Not(self.parse_not())
            self.depth -= 1
            return node
        return self.parse_primary()

    def parse_primary(self) -> FilterAst:
        if self.accept("("):
            self.nest()
            node = self.parse_or()
            self.expect(")")
            self.depth -= 1
            return node
        if self.current.kind != "IDENT":
            raise self.error({"(", "NOT", "IDENT"})
        return self.parse_comparison()

    def parse_fieldref(self) -> FieldRef:
        first = self.expect("IDENT")
        if self.accept("."):
            second = self.expect("IDENT")
            return FieldRef(second.text, first.text)
        return FieldRef(first.text)

    def parse_comparison(self) -> FilterAst:
        ref = self.parse_fieldref()
        tok = self.current
        if tok.kind == "OP":
            self.advance()
            return Compare(ref, tok.text, self.parse_literal())
        if self.accept("LIKE"):
            pattern = self.expect("STRING")
            return Like(ref, pattern.value)
        if self.accept("IS"):
            negated = self.accept("NOT") is not None
            self.expect("NULL")
            return IsNull(ref, negated)
        raise self.error({"OP", "LIKE", "IS", "."})

    def parse_literal(self) -> Literal:
        tok = self.current
        if tok.kind not in _LITERAL_KINDS:
            raise self.error(_LITERAL_KINDS - {"NULL"})
        if tok.kind == "NULL":
            raise BadExpression("NULL cannot be compared; use IS NULL or IS NOT NULL", tok.position)
        self.advance()
        if tok.kind == "INTEGER":
            return Literal("integer", tok.value)
        if tok.kind == "DECIMAL":
            return Literal("decimal", tok.value)
        if tok.kind == "STRING":
            return Literal("string", tok.value)
        return Literal("boolean", tok.kind == "TRUE")

    # order -----------------------------------------------------------------

    def parse_order_list(self) -> OrderSpec:
        items = []
        seen = set()
        while True:
            start = self.current.position
            ref = self.parse_fieldref()
            descending = False
            if self.accept("DESC"):
                descending = True
            else:
                self.accept("ASC")
            if ref in seen:
                raise BadExpression(f"duplicate order column {ref}", start)
            seen.add(ref)
            items.append(OrderItem(ref, descending))
            if not self.accept(","):
                break
        return OrderSpec(tuple(items))

    def finish(self, expected):
        if self.current.kind != "EOF":
            raise self.error(expected)


def parse_filter(text: Optional[str]) -> Optional[FilterAst]:
    """Parse a filter expression; ``None`` is returned for an absent or blank one (match all)."""
    if text is None or not text.strip():
        return None
    parser = _Parser(text)
    node = parser.parse_or()
    parser.finish({"AND", "OR", "EOF"})
    return node


def parse_order(text: Optional[str]) -> OrderSpec:
    """Parse an order expression; blank input yields an empty spec (provider default order)."""
    if text is None or not text.strip():
        return OrderSpec()
    parser = _Parser(text)
    spec = parser.parse_order_list()
    parser.finish({",", "ASC", "DESC", "EOF"})
    return spec
