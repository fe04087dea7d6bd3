"""Provider-side engine: catalog, users and grants, in-memory store, operations."""

from .catalog import ColumnDef, TableDef, localize
from .fixture import load_fixture_file, load_fixture_state
from .operations import (
    collect_references,
    materialize,
    plan_fields,
    read_table,
    read_table_headers,
    submit,
    validate_row,
)
from .provider import Provider
from .state import (
    Principal,
    StoreState,
    UserRecord,
    audit_state,
    authenticate,
    hash_password,
    state_hash,
)

__all__ = [
    "ColumnDef",
    "Principal",
    "Provider",
    "StoreState",
    "TableDef",
    "UserRecord",
    "audit_state",
    "authenticate",
    "collect_references",
    "hash_password",
    "load_fixture_file",
    "load_fixture_state",
    "localize",
    "materialize",
    "plan_fields",
    "read_table",
    "read_table_headers",
    "state_hash",
    "submit",
    "validate_row",
]
