"""Wire model: every RSP data/message type and its canonical JSON encoding.

Member names are the attribute names of the protocol tables, verbatim
(``TableName``, ``IsForeignKey``, ``ID``...).  The ``ArrayOfX`` wrappers are
plain JSON arrays.  Absent optional members are omitted, null cells are JSON
``null`` and unknown members are ignored on decode.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Callable, Optional, Union

from .cells import DATA_TYPES
from .errors import ERROR_CODES, BadOperation, InvariantViolation, MalformedMessage

Cell = Optional[str]

_LANGUAGE_RE = re.compile(r"[a-z]{2}")
_JOINED_ID_SUFFIX_RE = re.compile(r"#[0-9]+")
_LONG_MAX = 2**63 - 1


class Action(IntEnum):
    SELECT = 1
    INSERT = 2
    UPDATE = 3
    DELETE = 4


class Operation(IntEnum):
    INSERT = 1
    UPDATE = 2
    DELETE = 3


# --- member codecs ---------------------------------------------------------


class _Kind:
    """Converts one member between its JSON value and its Python value."""

    def __init__(self, name: str, decode: Callable[[Any, str], Any], encode: Callable[[Any], Any] = lambda v: v):
        self.name = name
        self.decode = decode
        self.encode = encode


def _fail(path: str, expected: str) -> MalformedMessage:
    return MalformedMessage(f"member {path} must be {expected}")


def _dec_str(value, path):
    if not isinstance(value, str):
        raise _fail(path, "a string")
    return value


def _dec_bool(value, path):
    if not isinstance(value, bool):
        raise _fail(path, "a boolean")
    return value


def _dec_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int) or abs(value) > _LONG_MAX:
        raise _fail(path, "an integer")
    return value


def _dec_cell_list(value, path):
    if not isinstance(value, list):
        raise _fail(path, "an array")
    for i, cell in enumerate(value):
        if cell is not None and not isinstance(cell, str):
            raise _fail(f"{path}[{i}]", "a string or null")
    return tuple(value)


def _dec_rows(value, path):
    if not isinstance(value, list):
        raise _fail(path, "an array")
    return tuple(_dec_cell_list(row, f"{path}[{i}]") for i, row in enumerate(value))


def _dec_int_list(value, path):
    if not isinstance(value, list):
        raise _fail(path, "an array")
    return tuple(_dec_int(v, f"{path}[{i}]") for i, v in enumerate(value))


STR = _Kind("string", _dec_str)
BOOL = _Kind("boolean", _dec_bool)
INT = _Kind("integer", _dec_int)
INT_LIST = _Kind("integer array", _dec_int_list, list)
CELLS = _Kind("string array", _dec_cell_list, list)
ROWS = _Kind("string matrix", _dec_rows, lambda rows: [list(r) for r in rows])


def _nested(cls) -> _Kind:
    return _Kind(cls.__name__, lambda v, p: _from_obj(cls, v, p), lambda m: _to_obj(m))


def _nested_list(cls) -> _Kind:
    def decode(value, path):
        if not isinstance(value, list):
            raise _fail(path, "an array")
        return tuple(_from_obj(cls, v, f"{path}[{i}]") for i, v in enumerate(value))

    return _Kind(f"{cls.__name__} array", decode, lambda items: [_to_obj(m) for m in items])


@dataclass(frozen=True)
class _Member:
    attr: str
    name: str
    kind: _Kind
    required: bool = True


def _freeze(obj, *attrs):
    for attr in attrs:
        value = getattr(obj, attr)
        if value is not None and not isinstance(value, tuple):
            object.__setattr__(obj, attr, tuple(value))


# --- shared data types -----------------------------------------------------


@dataclass(frozen=True, kw_only=True)
class TableHeader:
    table_name: str
    singular_title: str
    plural_title: str
    description: Optional[str] = None


@dataclass(frozen=True, kw_only=True)
class Field:
    data_type: str
    description: Optional[str] = None
    id: str
    is_auto_generated: bool = False
    is_display_field: bool = False
    is_editable: bool = True
    is_foreign_key: bool = False
    is_joined: bool = False
    is_nullable: bool = True
    is_primary_key: bool = False
    max_length: Optional[int] = None
    name: str
    referenced_field: Optional[str] = None
    referenced_table: Optional[str] = None
    table: str
    title: str


@dataclass(frozen=True, kw_only=True)
class Reference:
    red_field: str
    red_table: str
    ring_field: str
    ring_field_title: str
    ring_table: str
    ring_table_plural_title: str


@dataclass(frozen=True, kw_only=True)
class TableMessage:
    actions: tuple = ()
    fields: tuple = ()
    header: TableHeader
    items: tuple = ()
    references: tuple = ()

    def __post_init__(self):
        _freeze(self, "actions", "fields", "references")
        if not isinstance(self.items, tuple) or any(not isinstance(r, tuple) for r in self.items):
            object.__setattr__(self, "items", tuple(tuple(r) for r in self.items))


# --- messages --------------------------------------------------------------


@dataclass(frozen=True, kw_only=True)
class ReadTableHeadersRequest:
    user_name: str
    password: str = ""
    language: Optional[str] = None

    def __repr__(self):
        return f"ReadTableHeadersRequest(user_name={self.user_name!r}, language={self.language!r})"


@dataclass(frozen=True, kw_only=True)
class ReadTableHeadersResponse:
    table_headers: tuple = ()

    def __post_init__(self):
        _freeze(self, "table_headers")


@dataclass(frozen=True, kw_only=True)
class ReadTableRequest:
    user_name: str
    password: str = ""
    table_name: str
    language: Optional[str] = None
    skip: int = 0
    take: int = 0
    order_expression: Optional[str] = None
    filter_expression: Optional[str] = None

    def __repr__(self):
        return (
            f"ReadTableRequest(user_name={self.user_name!r}, table_name={self.table_name!r}, "
            f"language={self.language!r}, skip={self.skip}, take={self.take}, "
            f"order_expression={self.order_expression!r}, filter_expression={self.filter_expression!r})"
        )


@dataclass(frozen=True, kw_only=True)
class ReadTableResponse:
    table: TableMessage


@dataclass(frozen=True, kw_only=True)
class SubmitRequest:
    user_name: str
    password: str = ""
    table_name: str
    operation: int
    fields: tuple = ()
    data: tuple = ()

    def __post_init__(self):
        _freeze(self, "fields", "data")

    def __repr__(self):
        return (
            f"SubmitRequest(user_name={self.user_name!r}, table_name={self.table_name!r}, "
            f"operation={self.operation}, fields={[f.name for f in self.fields]!r}, data={list(self.data)!r})"
        )


@dataclass(frozen=True, kw_only=True)
class SubmitResponse:
    identity: Optional[str] = None


@dataclass(frozen=True, kw_only=True)
class ErrorEnvelope:
    code: str
    message: str


Message = Union[
    TableHeader,
    Field,
    Reference,
    TableMessage,
    ReadTableHeadersRequest,
    ReadTableHeadersResponse,
    ReadTableRequest,
    ReadTableResponse,
    SubmitRequest,
    SubmitResponse,
    ErrorEnvelope,
]

# Member order is the normative on-the-wire order.
SCHEMAS: dict[type, tuple[_Member, ...]] = {
    TableHeader: (
        _Member("table_name", "TableName", STR),
        _Member("singular_title", "SingularTitle", STR),
        _Member("plural_title", "PluralTitle", STR),
        _Member("description", "Description", STR, False),
    ),
    Field: (
        _Member("data_type", "DataType", STR),
        _Member("description", "Description", STR, False),
        _Member("id", "ID", STR),
        _Member("is_auto_generated", "IsAutoGenerated", BOOL),
        _Member("is_display_field", "IsDisplayField", BOOL),
        _Member("is_editable", "IsEditable", BOOL),
        _Member("is_foreign_key", "IsForeignKey", BOOL),
        _Member("is_joined", "IsJoined", BOOL),
        _Member("is_nullable", "IsNullable", BOOL),
        _Member("is_primary_key", "IsPrimaryKey", BOOL),
        _Member("max_length", "MaxLength", INT, False),
        _Member("name", "Name", STR),
        _Member("referenced_field", "ReferencedField", STR, False),
        _Member("referenced_table", "ReferencedTable", STR, False),
        _Member("table", "Table", STR),
        _Member("title", "Title", STR),
    ),
    Reference: (
        _Member("red_field", "RedField", STR),
        _Member("red_table", "RedTable", STR),
        _Member("ring_field", "RingField", STR),
        _Member("ring_field_title", "RingFieldTitle", STR),
        _Member("ring_table", "RingTable", STR),
        _Member("ring_table_plural_title", "RingTablePluralTitle", STR),
    ),
    TableMessage: (
        _Member("actions", "Actions", INT_LIST),
        _Member("fields", "Fields", _nested_list(Field)),
        _Member("header", "Header", _nested(TableHeader)),
        _Member("items", "Items", ROWS),
        _Member("references", "References", _nested_list(Reference)),
    ),
    ReadTableHeadersRequest: (
        _Member("user_name", "UserName", STR),
        _Member("password", "Password", STR),
        _Member("language", "Language", STR, False),
    ),
    ReadTableHeadersResponse: (_Member("table_headers", "TableHeaders", _nested_list(TableHeader)),),
    ReadTableRequest: (
        _Member("user_name", "UserName", STR),
        _Member("password", "Password", STR),
        _Member("table_name", "TableName", STR),
        _Member("language", "Language", STR, False),
        _Member("skip", "Skip", INT),
        _Member("take", "Take", INT),
        _Member("order_expression", "OrderExpression", STR, False),
        _Member("filter_expression", "FilterExpression", STR, False),
    ),
    ReadTableResponse: (_Member("table", "Table", _nested(TableMessage)),),
    SubmitRequest: (
        _Member("user_name", "UserName", STR),
        _Member("password", "Password", STR),
        _Member("table_name", "TableName", STR),
        _Member("operation", "Operation", INT),
        _Member("fields", "Fields", _nested_list(Field)),
        _Member("data", "Data", CELLS),
    ),
    SubmitResponse: (_Member("identity", "Identity", STR, False),),
    ErrorEnvelope: (
        _Member("code", "Code", STR),
        _Member("message", "Message", STR),
    ),
}

MESSAGE_KINDS: dict[str, type] = {cls.__name__: cls for cls in SCHEMAS}
# Convenience alias: the protocol calls this record "Table".
MESSAGE_KINDS["Table"] = TableMessage


def _kind_class(kind) -> type:
    if isinstance(kind, type) and kind in SCHEMAS:
        return kind
    try:
        return MESSAGE_KINDS[kind]
    except (KeyError, TypeError):
        raise ValueError(f"unknown message kind {kind!r}") from None


# --- object <-> JSON-object mapping ----------------------------------------


def _to_obj(message) -> dict:
    out = {}
    for member in SCHEMAS[type(message)]:
        value = getattr(message, member.attr)
        if value is None and not member.required:
            continue
        out[member.name] = member.kind.encode(value)
    return out


def _from_obj(cls, obj, path: str = ""):
    if not isinstance(obj, dict):
        raise _fail(path or cls.__name__, "a JSON object")
    kwargs = {}
    for member in SCHEMAS[cls]:
        where = f"{path}.{member.name}" if path else member.name
        value = obj.get(member.name)
        if value is None:
            if member.required:
                raise MalformedMessage(f"required member {where} is missing")
            kwargs[member.attr] = None
            continue
        kwargs[member.attr] = member.kind.decode(value, where)
    return cls(**kwargs)


def to_json_object(message) -> dict:
    """The JSON object model of ``message`` (what :func:`encode` serializes)."""
    return _to_obj(message)


def from_json_object(kind, obj):
    """Build a message of ``kind`` from an already-parsed JSON value; validates like :func:`decode`."""
    cls = _kind_class(kind)
    message = _from_obj(cls, obj)
    _raise_for_violations(message)
    return message


# --- public codec ----------------------------------------------------------


def encode(message) -> str:
    violations = validate_message(message)
    if violations:
        raise InvariantViolation(violations)
    return dump_json(_to_obj(message))


def dump_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def decode(kind, text: Union[str, bytes]):
    """Parse ``text`` as a message of ``kind`` (a class or its name).

    Raises MalformedMessage for invalid JSON, a missing required member, a
    wrongly typed value or a broken invariant.  A SubmitRequest whose
    Operation code is outside 1..3 raises BadOperation instead.
    """
    cls = _kind_class(kind)
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedMessage("body is not valid UTF-8") from None
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, RecursionError) as exc:
        raise MalformedMessage(f"body is not well-formed JSON ({getattr(exc, 'msg', 'too deeply nested')})") from None
    return from_json_object(cls, obj)


def _raise_for_violations(message) -> None:
    violations = validate_message(message)
    if not violations:
        return
    if isinstance(message, SubmitRequest) and message.operation not in _OPERATION_CODES:
        raise BadOperation(f"unsupported operation code {message.operation}")
    raise MalformedMessage("; ".join(violations))


# --- invariants ------------------------------------------------------------

_OPERATION_CODES = frozenset(int(op) for op in Operation)
_ACTION_CODES = frozenset(int(a) for a in Action)


def validate_message(message) -> list[str]:
    """Every invariant violation in ``message``, each prefixed by the offending member path."""
    check = _VALIDATORS.get(type(message))
    if check is None:
        return [f"{type(message).__name__}: not a wire-model message"]
    out: list[str] = []
    check(message, "", out)
    return out


def _at(prefix: str, name: str) -> str:
    return f"{prefix}.{name}" if prefix else name


def _check_types(message, prefix, out) -> bool:
    """Guard against hand-built messages with wrongly typed members."""
    ok = True
    for member in SCHEMAS[type(message)]:
        value = getattr(message, member.attr)
        if value is None:
            if member.required:
                out.append(f"{_at(prefix, member.name)}: required member is missing")
                ok = False
            continue
        try:
            member.kind.decode(member.kind.encode(value), member.name)
        except MalformedMessage as exc:
            out.append(f"{_at(prefix, member.name)}: {exc.message}")
            ok = False
        except (KeyError, AttributeError, TypeError):
            out.append(f"{_at(prefix, member.name)}: must be {member.kind.name}")
            ok = False
    return ok


def _nonempty(message, prefix, out, *pairs):
    for attr, name in pairs:
        if getattr(message, attr) == "":
            out.append(f"{_at(prefix, name)}: must not be empty")


def _check_header(h: TableHeader, prefix, out):
    if not _check_types(h, prefix, out):
        return
    _nonempty(h, prefix, out, ("table_name", "TableName"), ("singular_title", "SingularTitle"), ("plural_title", "PluralTitle"))


def _check_field(f: Field, prefix, out):
    if not _check_types(f, prefix, out):
        return
    _nonempty(f, prefix, out, ("name", "Name"), ("table", "Table"))
    if f.data_type not in DATA_TYPES:
        out.append(f"{_at(prefix, 'DataType')}: unknown data type {f.data_type!r}")
    base_id = f"{f.table}.{f.name}"
    if not (f.id == base_id or (f.id.startswith(base_id) and _JOINED_ID_SUFFIX_RE.fullmatch(f.id[len(base_id):]))):
        out.append(f"{_at(prefix, 'ID')}: must be Table.Name")
    if f.is_foreign_key:
        if f.referenced_table is None:
            out.append(f"{_at(prefix, 'ReferencedTable')}: required for a foreign key column")
        if f.referenced_field is None:
            out.append(f"{_at(prefix, 'ReferencedField')}: required for a foreign key column")
    else:
        if f.referenced_table is not None:
            out.append(f"{_at(prefix, 'ReferencedTable')}: only allowed on a foreign key column")
        if f.referenced_field is not None:
            out.append(f"{_at(prefix, 'ReferencedField')}: only allowed on a foreign key column")
    if f.max_length is not None:
        if f.data_type != "varchar":
            out.append(f"{_at(prefix, 'MaxLength')}: only allowed for varchar columns")
        elif f.max_length < 0:
            out.append(f"{_at(prefix, 'MaxLength')}: must be non-negative")
    if f.is_auto_generated and f.is_editable:
        out.append(f"{_at(prefix, 'IsEditable')}: an auto-generated column cannot be editable")
    if f.is_display_field and not f.is_joined:
        out.append(f"{_at(prefix, 'IsJoined')}: a display field must be joined")


def _check_field_list(items, prefix, out):
    seen = set()
    for i, f in enumerate(items):
        if not isinstance(f, Field):
            out.append(f"{prefix}[{i}]: must be a Field")
            continue
        _check_field(f, f"{prefix}[{i}]", out)
        if f.id in seen:
            out.append(f"{prefix}[{i}].ID: duplicate identifier {f.id!r}")
        seen.add(f.id)


def _check_reference(r: Reference, prefix, out):
    if not _check_types(r, prefix, out):
        return
    _nonempty(
        r, prefix, out,
        ("red_field", "RedField"), ("red_table", "RedTable"), ("ring_field", "RingField"),
        ("ring_field_title", "RingFieldTitle"), ("ring_table", "RingTable"),
        ("ring_table_plural_title", "RingTablePluralTitle"),
    )
    if (r.ring_table, r.ring_field) == (r.red_table, r.red_field):
        out.append(f"{_at(prefix, 'RingField')}: a column cannot reference itself")


def _check_table(t: TableMessage, prefix, out):
    if not _check_types(t, prefix, out):
        return
    actions = list(t.actions)
    if any(a not in _ACTION_CODES for a in actions):
        out.append(f"{_at(prefix, 'Actions')}: codes must be within 1..4")
    elif actions != sorted(set(actions)):
        out.append(f"{_at(prefix, 'Actions')}: codes must be distinct and ascending")
    _check_field_list(t.fields, _at(prefix, "Fields"), out)
    _check_header(t.header, _at(prefix, "Header"), out)
    width = len(t.fields)
    for i, row in enumerate(t.items):
        if len(row) != width:
            out.append(f"{_at(prefix, 'Items')}[{i}]: row has {len(row)} cells for {width} fields")
    for i, r in enumerate(t.references):
        _check_reference(r, f"{_at(prefix, 'References')}[{i}]", out)


def _check_language(message, prefix, out):
    if message.language is not None and not _LANGUAGE_RE.fullmatch(message.language):
        out.append(f"{_at(prefix, 'Language')}: must be a two-letter lowercase ISO 639-1 code")


def _check_rth_request(m: ReadTableHeadersRequest, prefix, out):
    if not _check_types(m, prefix, out):
        return
    _nonempty(m, prefix, out, ("user_name", "UserName"))
    _check_language(m, prefix, out)


def _check_rth_response(m: ReadTableHeadersResponse, prefix, out):
    if not _check_types(m, prefix, out):
        return
    seen = set()
    for i, h in enumerate(m.table_headers):
        _check_header(h, f"TableHeaders[{i}]", out)
        if h.table_name in seen:
            out.append(f"TableHeaders[{i}].TableName: duplicate table {h.table_name!r}")
        seen.add(h.table_name)


def _check_rt_request(m: ReadTableRequest, prefix, out):
    if not _check_types(m, prefix, out):
        return
    _nonempty(m, prefix, out, ("user_name", "UserName"), ("table_name", "TableName"))
    _check_language(m, prefix, out)
    if m.skip < 0:
        out.append("Skip: must be non-negative")
    if m.take < 0:
        out.append("Take: must be non-negative")


def _check_rt_response(m: ReadTableResponse, prefix, out):
    if not _check_types(m, prefix, out):
        return
    _check_table(m.table, "Table", out)
    if Action.SELECT not in m.table.actions:
        out.append("Table.Actions: a read result must include SELECT (1)")


def _check_submit_request(m: SubmitRequest, prefix, out):
    if not _check_types(m, prefix, out):
        return
    _nonempty(m, prefix, out, ("user_name", "UserName"), ("table_name", "TableName"))
    if m.operation not in _OPERATION_CODES:
        out.append("Operation: must be 1 (INSERT), 2 (UPDATE) or 3 (DELETE)")
    _check_field_list(m.fields, "Fields", out)
    if len(m.data) != len(m.fields):
        out.append(f"Data: {len(m.data)} values for {len(m.fields)} fields")


def _check_submit_response(m: SubmitResponse, prefix, out):
    _check_types(m, prefix, out)


def _check_envelope(m: ErrorEnvelope, prefix, out):
    if not _check_types(m, prefix, out):
        return
    if m.code not in ERROR_CODES:
        out.append(f"Code: unknown error code {m.code!r}")


_VALIDATORS: dict[type, Callable] = {
    TableHeader: _check_header,
    Field: _check_field,
    Reference: _check_reference,
    TableMessage: _check_table,
    ReadTableHeadersRequest: _check_rth_request,
    ReadTableHeadersResponse: _check_rth_response,
    ReadTableRequest: _check_rt_request,
    ReadTableResponse: _check_rt_response,
    SubmitRequest: _check_submit_request,
    SubmitResponse: _check_submit_response,
    ErrorEnvelope: _check_envelope,
}


def required_members(kind) -> list[str]:
    """Top-level member names that must be present for ``kind``."""
    return [m.name for m in SCHEMAS[_kind_class(kind)] if m.required]


def member_names(kind) -> list[str]:
    return [m.name for m in SCHEMAS[_kind_class(kind)]]


def placeholder_field(table: str, name: str) -> Field:
    """An inert Field carrying only a column name, for submit requests."""
    return Field(data_type="text", id=f"{table}.{name}", name=name, table=table, title=name)


__all__ = [
    "Action",
    "Cell",
    "ErrorEnvelope",
    "Field",
    "MESSAGE_KINDS",
    "Message",
    "Operation",
    "ReadTableHeadersRequest",
    "ReadTableHeadersResponse",
    "ReadTableRequest",
    "ReadTableResponse",
    "Reference",
    "SCHEMAS",
    "SubmitRequest",
    "SubmitResponse",
    "TableHeader",
    "TableMessage",
    "decode",
    "dump_json",
    "encode",
    "from_json_object",
    "member_names",
    "placeholder_field",
    "required_members",
    "to_json_object",
    "validate_message",
]
