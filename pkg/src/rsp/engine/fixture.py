"""Fixture documents: the JSON file that declares schema, rows, users and grants.

::

    {"DefaultLanguage": "en",
     "Tables": [{"Name", "SingularTitles", "PluralTitles", "Description"?,
                 "DisplayColumn"?, "Columns": [...], "Rows": [[...], ...]}],
     "Users": [{"UserName", "PasswordHash", "Salt", "Grants": {table: [1, 2]}}]}

A user may carry a plaintext ``"Password"`` instead of hash and salt; it is
hashed on load.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

from ..cells import DATA_TYPES, INTEGER_TYPES
from ..errors import FixtureError
from .catalog import ColumnDef, TableDef
from .state import StoreState, UserRecord, cell_violations, hash_password, new_salt


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise FixtureError(f"{where}: missing {key}")
    value = obj[key]
    if kind is bool:
        ok = isinstance(value, bool)
    elif kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise FixtureError(f"{where}: {key} has the wrong type")
    return value


def _optional(obj: dict, key: str, kind, where: str):
    if obj.get(key) is None:
        return None
    return _require(obj, key, kind, where)


def _titles(obj: dict, key: str, where: str) -> dict:
    titles = _require(obj, key, dict, where)
    for lang, text in titles.items():
        if not isinstance(text, str):
            raise FixtureError(f"{where}: {key}[{lang}] must be a string")
    return dict(titles)


def _parse_column(obj: Any, where: str) -> ColumnDef:
    if not isinstance(obj, dict):
        raise FixtureError(f"{where}: column must be an object")
    name = _require(obj, "Name", str, where)
    where = f"{where}.{name}"
    data_type = _require(obj, "DataType", str, where)
    if data_type not in DATA_TYPES:
        raise FixtureError(f"{where}: unknown data type {data_type!r}")
    refs = _optional(obj, "References", dict, where)
    fk_target = None
    if refs is not None:
        fk_target = (_require(refs, "Table", str, where), _require(refs, "Column", str, where))
    max_length = _optional(obj, "MaxLength", int, where)
    if max_length is not None and (data_type != "varchar" or max_length < 0):
        raise FixtureError(f"{where}: MaxLength is only valid (and non-negative) on varchar columns")
    column = ColumnDef(
        name=name,
        data_type=data_type,
        nullable=_require(obj, "Nullable", bool, where),
        primary_key=_require(obj, "PrimaryKey", bool, where),
        auto_generated=_require(obj, "AutoGenerated", bool, where),
        editable=_require(obj, "Editable", bool, where),
        max_length=max_length,
        fk_target=fk_target,
        titles=_titles(obj, "Titles", where),
        description=_optional(obj, "Description", str, where),
    )
    if column.auto_generated and not (column.primary_key and data_type in INTEGER_TYPES):
        raise FixtureError(f"{where}: an auto-generated column must be an int/long primary key")
    if column.primary_key and column.nullable:
        raise FixtureError(f"{where}: a primary key column cannot be nullable")
    return column


def _parse_table(obj: Any, index: int) -> tuple[TableDef, list]:
    where = f"Tables[{index}]"
    if not isinstance(obj, dict):
        raise FixtureError(f"{where}: table must be an object")
    name = _require(obj, "Name", str, where)
    where = name or where
    raw_columns = _require(obj, "Columns", list, where)
    columns = tuple(_parse_column(c, where) for c in raw_columns)
    names = [c.name for c in columns]
    if len(set(names)) != len(names):
        raise FixtureError(f"{where}: duplicate column name")
    pks = [c for c in columns if c.primary_key]
    if len(pks) != 1:
        raise FixtureError(f"{where}: exactly one primary key column is required, found {len(pks)}")
    display = _optional(obj, "DisplayColumn", str, where)
    if display is not None:
        col = next((c for c in columns if c.name == display), None)
        if col is None or col.primary_key:
            raise FixtureError(f"{where}: display column {display!r} missing or is the key")
    table = TableDef(
        name=name,
        columns=columns,
        singular_titles=_titles(obj, "SingularTitles", where),
        plural_titles=_titles(obj, "PluralTitles", where),
        description=_optional(obj, "Description", str, where),
        display_column=display,
    )
    rows = obj.get("Rows", [])
    if not isinstance(rows, list):
        raise FixtureError(f"{where}: Rows must be an array")
    return table, rows


def load_fixture_state(fixture: dict) -> StoreState:
    """Validate a parsed fixture document and build the initial state."""
    if not isinstance(fixture, dict):
        raise FixtureError("fixture must be a JSON object")
    default_language = fixture.get("DefaultLanguage", "en")
    if not isinstance(default_language, str):
        raise FixtureError("DefaultLanguage must be a string")

    catalog: dict[str, TableDef] = {}
    raw_rows: dict[str, list] = {}
    for i, obj in enumerate(_require(fixture, "Tables", list, "fixture")):
        table, rows = _parse_table(obj, i)
        if table.name in catalog:
            raise FixtureError(f"{table.name}: duplicate table name")
        catalog[table.name] = table
        raw_rows[table.name] = rows

    for table in catalog.values():
        for column in table.columns:
            if column.fk_target is None:
                continue
            target_name, target_col = column.fk_target
            target = catalog.get(target_name)
            where = f"{table.name}.{column.name}"
            if target is None:
                raise FixtureError(f"{where}: references unknown table {target_name!r}")
            if target.primary_key.name != target_col:
                raise FixtureError(f"{where}: must reference the primary key of {target_name}")
            if target.primary_key.data_type != column.data_type:
                raise FixtureError(f"{where}: type differs from {target_name}.{target_col}")

    rows: dict[str, tuple] = {}
    counters: dict[str, int] = {}
    for name, table in catalog.items():
        k = table.pk_index
        seen = set()
        out = []
        for i, row in enumerate(raw_rows[name]):
            if not isinstance(row, list) or len(row) != len(table.columns):
                raise FixtureError(f"{name}[{i}]: row must have {len(table.columns)} cells")
            for column, value in zip(table.columns, row):
                problems = cell_violations(table, column, value)
                if problems:
                    raise FixtureError(f"{name}[{i}] bad cell: {problems[0]}")
            if row[k] in seen:
                raise FixtureError(f"{name}[{i}]: duplicate primary key {row[k]!r}")
            seen.add(row[k])
            out.append(tuple(row))
        rows[name] = tuple(out)
        if table.has_identity:
            counters[name] = max((int(r[k]) for r in out), default=0) + 1

    for name, table in catalog.items():
        for j, column in enumerate(table.columns):
            if column.fk_target is None:
                continue
            target = catalog[column.fk_target[0]]
            keys = {r[target.pk_index] for r in rows[target.name]}
            for i, row in enumerate(rows[name]):
                if row[j] is not None and row[j] not in keys:
                    raise FixtureError(f"{name}[{i}].{column.name}: dangling reference {row[j]!r}")

    users: dict[str, UserRecord] = {}
    for i, obj in enumerate(fixture.get("Users", [])):
        where = f"Users[{i}]"
        if not isinstance(obj, dict):
            raise FixtureError(f"{where}: user must be an object")
        user_name = _require(obj, "UserName", str, where)
        if not user_name or user_name in users:
            raise FixtureError(f"{where}: empty or duplicate user name")
        if "Password" in obj:
            salt = new_salt()
            password_hash = hash_password(_require(obj, "Password", str, where), salt)
        else:
            password_hash = _require(obj, "PasswordHash", str, where)
            salt = _require(obj, "Salt", str, where)
        grants = {}
        for table_name, codes in _require(obj, "Grants", dict, where).items():
            if table_name not in catalog:
                raise FixtureError(f"{where}: grant on unknown table {table_name!r}")
            if not isinstance(codes, list) or any(c not in (1, 2, 3, 4) or isinstance(c, bool) for c in codes):
                raise FixtureError(f"{where}: grant codes for {table_name} must be within 1..4")
            grants[table_name] = frozenset(codes)
        users[user_name] = UserRecord(password_hash, salt, grants)

    return StoreState(
        catalog=catalog,
        rows=rows,
        identity_counters=counters,
        users=users,
        default_language=default_language,
    )


def load_fixture_file(path: Union[str, Path]) -> StoreState:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise FixtureError(f"cannot read fixture {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FixtureError(f"fixture {path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    return load_fixture_state(doc)
