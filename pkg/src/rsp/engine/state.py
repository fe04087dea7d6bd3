"""Provider state: catalog, rows, identity counters and user registry.

A :class:`StoreState` is never mutated in place.  Submits build a new state
that shares untouched tables with the old one, so a reader holding a state
reference always sees a consistent snapshot.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import secrets
from dataclasses import dataclass, field
from typing import Mapping, Optional

from ..cells import parse_cell
from ..errors import AuthFailed
from .catalog import TableDef

PASSWORD_SCHEME = "pbkdf2_sha256"
DEFAULT_ITERATIONS = 1000


@dataclass(frozen=True)
class Principal:
    user_name: str
    grants: Mapping[str, frozenset] = field(default_factory=dict)

    def actions(self, table: str) -> tuple[int, ...]:
        return tuple(sorted(self.grants.get(table, ())))

    def can(self, table: str, action: int) -> bool:
        return action in self.grants.get(table, ())


@dataclass(frozen=True)
class UserRecord:
    password_hash: str
    salt: str
    grants: Mapping[str, frozenset] = field(default_factory=dict)


@dataclass(frozen=True)
class StoreState:
    catalog: Mapping[str, TableDef]
    rows: Mapping[str, tuple]
    identity_counters: Mapping[str, int]
    users: Mapping[str, UserRecord]
    default_language: str = "en"

    def table(self, name: str) -> Optional[TableDef]:
        return self.catalog.get(name)


# --- passwords -------------------------------------------------------------


def hash_password(password: str, salt: str, iterations: int = DEFAULT_ITERATIONS) -> str:
    """``pbkdf2_sha256$<iterations>$<hex digest>`` for ``password`` under the hex ``salt``."""
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), bytes.fromhex(salt), iterations)
    return f"{PASSWORD_SCHEME}${iterations}${digest.hex()}"


def new_salt() -> str:
    return secrets.token_hex(16)


def verify_password(password: str, salt: str, stored: str) -> bool:
    try:
        scheme, iterations, _ = stored.split("$")
        if scheme != PASSWORD_SCHEME:
            return False
        candidate = hash_password(password, salt, int(iterations))
    except ValueError:
        return False
    return hmac.compare_digest(candidate, stored)


_DUMMY_SALT = "00" * 16
_DUMMY_HASH = hash_password("", _DUMMY_SALT)


def authenticate(state: StoreState, user_name: str, password: str) -> Principal:
    """The principal for valid credentials; AuthFailed otherwise.

    Unknown users still pay for one hash so the two failure modes take the
    same time and produce the same error.
    """
    record = state.users.get(user_name)
    if record is None:
        verify_password(password, _DUMMY_SALT, _DUMMY_HASH)
        raise AuthFailed()
    if not verify_password(password, record.salt, record.password_hash):
        raise AuthFailed()
    return Principal(user_name, record.grants)


# --- hashing and auditing --------------------------------------------------


def state_hash(state: StoreState) -> str:
    """Digest of everything the protocol can change (rows, counters) plus users and grants."""
    doc = {
        "rows": {name: [list(r) for r in rows] for name, rows in sorted(state.rows.items())},
        "counters": dict(sorted(state.identity_counters.items())),
        "users": {
            name: [u.password_hash, u.salt, {t: sorted(g) for t, g in sorted(u.grants.items())}]
            for name, u in sorted(state.users.items())
        },
        "tables": sorted(state.catalog),
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode("utf-8")).hexdigest()


def cell_violations(table: TableDef, column, value) -> list[str]:
    """Encoding, nullability and length problems of one cell (no cross-row checks)."""
    where = f"{table.name}.{column.name}"
    if value is None:
        return [] if column.nullable else [f"{where}: null is not allowed"]
    if not isinstance(value, str):
        return [f"{where}: cell must be a string or null"]
    try:
        parse_cell(column.data_type, value)
    except ValueError as exc:
        return [f"{where}: {exc}"]
    if column.max_length is not None and len(value) > column.max_length:
        return [f"{where}: length {len(value)} exceeds maximum {column.max_length}"]
    return []


def pk_index(state: StoreState, table_name: str) -> dict:
    """Primary-key cell -> row position."""
    table = state.catalog[table_name]
    k = table.pk_index
    return {row[k]: i for i, row in enumerate(state.rows[table_name])}


def audit_state(state: StoreState) -> list[str]:
    """Full consistency check: widths, encodings, PK uniqueness, FK resolution, counters."""
    problems: list[str] = []
    keys = {}
    for name, table in state.catalog.items():
        k = table.pk_index
        seen = set()
        for i, row in enumerate(state.rows.get(name, ())):
            if len(row) != len(table.columns):
                problems.append(f"{name}[{i}]: {len(row)} cells for {len(table.columns)} columns")
                continue
            for column, value in zip(table.columns, row):
                problems.extend(f"{name}[{i}] {p}" for p in cell_violations(table, column, value))
            if row[k] in seen:
                problems.append(f"{name}[{i}]: duplicate primary key {row[k]!r}")
            seen.add(row[k])
        keys[name] = seen
        if table.has_identity:
            counter = state.identity_counters.get(name)
            numeric = [int(v) for v in seen if v is not None and _is_int(v)]
            if counter is None or (numeric and counter <= max(numeric)):
                problems.append(f"{name}: identity counter {counter} does not exceed existing keys")
    for name, table in state.catalog.items():
        for j, column in enumerate(table.columns):
            if column.fk_target is None:
                continue
            target = column.fk_target[0]
            for i, row in enumerate(state.rows.get(name, ())):
                if j < len(row) and row[j] is not None and row[j] not in keys.get(target, ()):
                    problems.append(f"{name}[{i}].{column.name}: dangling reference {row[j]!r} to {target}")
    return problems


def _is_int(text: str) -> bool:
    try:
        int(text)
    except ValueError:
        return False
    return True
