"""The three protocol operations against a :class:`StoreState`.

Reads are pure.  :func:`submit` returns a new state alongside the response
and never touches the input state, which makes every failing submit
trivially atomic.
"""

from __future__ import annotations

from functools import cmp_to_key
from typing import Mapping, Optional, Sequence

from ..errors import BadOperation, ConstraintViolation, Forbidden, NotFound, UnknownField, UnknownTable
from ..expression import bind_filter, bind_order, compare_rows, eval_filter, parse_filter, parse_order
from ..wire import (
    Action,
    Field,
    Operation,
    ReadTableRequest,
    Reference,
    SubmitRequest,
    SubmitResponse,
    TableHeader,
    TableMessage,
)
from .catalog import ColumnDef, TableDef, localize
from .state import Principal, StoreState, cell_violations, pk_index


def _table(state: StoreState, name: str) -> TableDef:
    table = state.catalog.get(name)
    if table is None:
        raise UnknownTable(f"unknown table {name!r}")
    return table


def table_header(state: StoreState, table: TableDef, language: Optional[str]) -> TableHeader:
    return TableHeader(
        table_name=table.name,
        singular_title=localize(table.singular_titles, language, state.default_language, table.name),
        plural_title=localize(table.plural_titles, language, state.default_language, table.name),
        description=table.description,
    )


def read_table_headers(state: StoreState, principal: Principal, language: Optional[str] = None) -> list[TableHeader]:
    """Headers of every SELECT-granted table, sorted by name."""
    return [
        table_header(state, state.catalog[name], language)
        for name in sorted(state.catalog)
        if principal.can(name, Action.SELECT)
    ]


def _column_title(state: StoreState, column: ColumnDef, language: Optional[str]) -> str:
    return localize(column.titles, language, state.default_language, column.name)


def _base_field(state: StoreState, table: TableDef, column: ColumnDef, language: Optional[str]) -> Field:
    fk = column.fk_target
    return Field(
        data_type=column.data_type,
        description=column.description,
        id=f"{table.name}.{column.name}",
        is_auto_generated=column.auto_generated,
        is_display_field=False,
        is_editable=column.editable and not column.auto_generated,
        is_foreign_key=fk is not None,
        is_joined=False,
        is_nullable=column.nullable,
        is_primary_key=column.primary_key,
        max_length=column.max_length if column.data_type == "varchar" else None,
        name=column.name,
        referenced_field=fk[1] if fk else None,
        referenced_table=fk[0] if fk else None,
        table=table.name,
        title=_column_title(state, column, language),
    )


def _unique_id(base: str, used: set) -> str:
    if base not in used:
        return base
    n = 2
    while f"{base}#{n}" in used:
        n += 1
    return f"{base}#{n}"


def plan_fields(state: StoreState, table_name: str, language: Optional[str] = None) -> list[Field]:
    """Base columns in catalog order, each foreign key followed by its joined display field."""
    table = _table(state, table_name)
    fields: list[Field] = []
    used: set[str] = set()
    for column in table.columns:
        base = _base_field(state, table, column, language)
        fields.append(base)
        used.add(base.id)
        if column.fk_target is None:
            continue
        target = state.catalog[column.fk_target[0]]
        if target.display_column is None:
            continue
        display = target.column(target.display_column)
        joined_id = _unique_id(f"{target.name}.{display.name}", used)
        used.add(joined_id)
        fields.append(
            Field(
                data_type=display.data_type,
                description=display.description,
                id=joined_id,
                is_auto_generated=False,
                is_display_field=True,
                is_editable=False,
                is_foreign_key=False,
                is_joined=True,
                is_nullable=True,
                is_primary_key=False,
                max_length=display.max_length if display.data_type == "varchar" else None,
                name=display.name,
                table=target.name,
                title=_column_title(state, display, language),
            )
        )
    return fields


def collect_references(state: StoreState, table_name: str, language: Optional[str] = None) -> list[Reference]:
    """Incoming foreign-key edges of ``table_name``, ordered by (ring table, ring column)."""
    _table(state, table_name)
    refs = []
    for ring in state.catalog.values():
        for column in ring.columns:
            if column.fk_target is None or column.fk_target[0] != table_name:
                continue
            refs.append(
                Reference(
                    red_field=column.fk_target[1],
                    red_table=table_name,
                    ring_field=column.name,
                    ring_field_title=_column_title(state, column, language),
                    ring_table=ring.name,
                    ring_table_plural_title=localize(
                        ring.plural_titles, language, state.default_language, ring.name
                    ),
                )
            )
    refs.sort(key=lambda r: (r.ring_table, r.ring_field))
    return refs


def materialize(state: StoreState, table_name: str) -> list[tuple]:
    """Stored rows in insertion order, each widened with its joined display cells."""
    table = _table(state, table_name)
    plan = []  # per column: None, or (display column index, lookup dict)
    lookups: dict[str, dict] = {}
    for column in table.columns:
        target_name = column.fk_target[0] if column.fk_target else None
        target = state.catalog.get(target_name) if target_name else None
        if target is None or target.display_column is None:
            plan.append(None)
            continue
        if target_name not in lookups:
            lookups[target_name] = pk_index(state, target_name)
        plan.append((target.index_of(target.display_column), lookups[target_name], state.rows[target_name]))
    out = []
    for row in state.rows[table_name]:
        wide = []
        for cell, join in zip(row, plan):
            wide.append(cell)
            if join is None:
                continue
            display_idx, lookup, target_rows = join
            pos = lookup.get(cell) if cell is not None else None
            wide.append(target_rows[pos][display_idx] if pos is not None else None)
        out.append(tuple(wide))
    return out


def read_table(state: StoreState, principal: Principal, request: ReadTableRequest) -> TableMessage:
    table = _table(state, request.table_name)
    if not principal.can(table.name, Action.SELECT):
        raise Forbidden(f"user {principal.user_name!r} may not read {table.name!r}")
    language = request.language
    fields = plan_fields(state, table.name, language)
    flt = bind_filter(parse_filter(request.filter_expression), fields)
    order = bind_order(parse_order(request.order_expression), fields)

    rows = [row for row in materialize(state, table.name) if eval_filter(flt, row)]
    if order.items:
        rows.sort(key=cmp_to_key(lambda a, b: compare_rows(order, a, b)))
    rows = rows[request.skip:]
    if request.take:
        rows = rows[: request.take]

    return TableMessage(
        actions=principal.actions(table.name),
        fields=tuple(fields),
        header=table_header(state, table, language),
        items=tuple(rows),
        references=tuple(collect_references(state, table.name, language)),
    )


# --- writes ----------------------------------------------------------------


def validate_row(
    state: StoreState,
    table_name: str,
    cells: Mapping[str, Optional[str]],
    *,
    replacing: Optional[str] = None,
) -> list[str]:
    """Every problem with the full row ``cells`` (column name -> cell; missing means null).

    ``replacing`` is the key of the row being overwritten, which is exempt
    from the primary-key uniqueness check.
    """
    table = _table(state, table_name)
    problems = [f"{table_name}.{name}: unknown column" for name in cells if table.column(name) is None]
    for column in table.columns:
        value = cells.get(column.name)
        cell_problems = cell_violations(table, column, value)
        problems.extend(cell_problems)
        if cell_problems or value is None:
            continue
        if column.primary_key and value != replacing and value in pk_index(state, table_name):
            problems.append(f"{table_name}.{column.name}: duplicate primary key {value!r}")
        if column.fk_target is not None:
            target = column.fk_target[0]
            if value not in pk_index(state, target):
                problems.append(f"{table_name}.{column.name}: no {target} row with key {value!r}")
    return problems


_REQUIRED_GRANT = {Operation.INSERT: Action.INSERT, Operation.UPDATE: Action.UPDATE, Operation.DELETE: Action.DELETE}


def _named_cells(table: TableDef, request: SubmitRequest) -> dict[str, Optional[str]]:
    cells: dict[str, Optional[str]] = {}
    for f, value in zip(request.fields, request.data):
        if table.column(f.name) is None:
            raise UnknownField(f"table {table.name!r} has no column {f.name!r}")
        if f.name in cells:
            raise BadOperation(f"column {f.name!r} given more than once")
        cells[f.name] = value
    return cells


def _with_rows(state: StoreState, table_name: str, rows: Sequence[tuple], counter: Optional[int] = None) -> StoreState:
    new_rows = dict(state.rows)
    new_rows[table_name] = tuple(rows)
    counters = state.identity_counters
    if counter is not None:
        counters = dict(counters)
        counters[table_name] = counter
    return StoreState(state.catalog, new_rows, counters, state.users, state.default_language)


def _locate(state: StoreState, table: TableDef, cells: Mapping[str, Optional[str]], op_name: str) -> int:
    pk = table.primary_key
    if pk.name not in cells:
        raise BadOperation(f"{op_name} requires the primary key column {pk.name!r}")
    key = cells[pk.name]
    problems = cell_violations(table, pk, key)
    if problems:
        raise ConstraintViolation(problems[0])
    pos = pk_index(state, table.name).get(key)
    if pos is None:
        raise NotFound(f"no {table.name} row with key {key!r}")
    return pos


def submit(state: StoreState, principal: Principal, request: SubmitRequest) -> tuple[StoreState, SubmitResponse]:
    """Apply one INSERT/UPDATE/DELETE; returns ``(new_state, response)``."""
    table = _table(state, request.table_name)
    try:
        operation = Operation(request.operation)
    except ValueError:
        raise BadOperation(f"unsupported operation code {request.operation}") from None
    if not principal.can(table.name, _REQUIRED_GRANT[operation]):
        raise Forbidden(f"user {principal.user_name!r} may not {operation.name} on {table.name!r}")
    cells = _named_cells(table, request)

    if operation is Operation.INSERT:
        return _insert(state, table, cells)
    if operation is Operation.UPDATE:
        return _update(state, table, cells)
    return _delete(state, table, cells)


def _insert(state: StoreState, table: TableDef, cells: dict) -> tuple[StoreState, SubmitResponse]:
    for column in table.columns:
        if column.auto_generated and column.name in cells:
            raise BadOperation(f"column {column.name!r} is auto-generated and cannot be supplied")
    missing = [
        c.name for c in table.columns if not c.nullable and not c.auto_generated and c.name not in cells
    ]
    if missing:
        raise ConstraintViolation(f"missing value for non-nullable column(s): {', '.join(missing)}")
    identity = None
    counter = None
    if table.has_identity:
        counter = state.identity_counters.get(table.name, 1)
        identity = str(counter)
        cells = {**cells, table.primary_key.name: identity}
    problems = validate_row(state, table.name, cells)
    if problems:
        raise ConstraintViolation("; ".join(problems))
    row = tuple(cells.get(c.name) for c in table.columns)
    new_state = _with_rows(
        state, table.name, state.rows[table.name] + (row,), counter + 1 if counter is not None else None
    )
    return new_state, SubmitResponse(identity=identity)


def _update(state: StoreState, table: TableDef, cells: dict) -> tuple[StoreState, SubmitResponse]:
    pos = _locate(state, table, cells, "UPDATE")
    pk = table.primary_key
    for name in cells:
        column = table.column(name)
        if column is pk:
            continue
        if column.auto_generated or not column.editable:
            raise BadOperation(f"column {name!r} is not editable")
    current = state.rows[table.name][pos]
    merged = {c.name: current[i] for i, c in enumerate(table.columns)}
    merged.update(cells)
    problems = validate_row(state, table.name, merged, replacing=current[table.pk_index])
    if problems:
        raise ConstraintViolation("; ".join(problems))
    rows = list(state.rows[table.name])
    rows[pos] = tuple(merged[c.name] for c in table.columns)
    return _with_rows(state, table.name, rows), SubmitResponse()


def _delete(state: StoreState, table: TableDef, cells: dict) -> tuple[StoreState, SubmitResponse]:
    pos = _locate(state, table, cells, "DELETE")
    key = state.rows[table.name][pos][table.pk_index]
    for ring in state.catalog.values():
        for j, column in enumerate(ring.columns):
            if column.fk_target and column.fk_target[0] == table.name:
                if any(row[j] == key for row in state.rows[ring.name]):
                    raise ConstraintViolation(
                        f"{table.name} row {key!r} is referenced by {ring.name}.{column.name}"
                    )
    rows = state.rows[table.name][:pos] + state.rows[table.name][pos + 1:]
    return _with_rows(state, table.name, rows), SubmitResponse()
