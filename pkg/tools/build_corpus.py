#!/usr/bin/env python3
"""Regenerate corpus/fixtures/{v1,v2}.json and re-record the golden corpus.

Usage: python tools/build_corpus.py [corpus_dir]

The recorded responses come from the reference service running on v1; once
committed they are frozen and only change when this script is rerun on
purpose.
"""

from __future__ import annotations

import copy
import json
import shutil
import sys
from pathlib import Path

from rsp.conformance import CaseSpec, record_corpus
from rsp.engine.state import hash_password
from rsp.service import ServiceConfig, serve

ROOT = Path(__file__).resolve().parent.parent


def col(name, data_type, *, nullable=False, pk=False, auto=False, editable=True, max_length=None,
        ref=None, titles=None, description=None):
    out = {
        "Name": name,
        "DataType": data_type,
        "Nullable": nullable,
        "PrimaryKey": pk,
        "AutoGenerated": auto,
        "Editable": editable and not auto,
        "Titles": titles or {"en": name},
    }
    if max_length is not None:
        out["MaxLength"] = max_length
    if ref is not None:
        out["References"] = {"Table": ref[0], "Column": ref[1]}
    if description is not None:
        out["Description"] = description
    return out


def user(name, password, salt, grants):
    return {
        "UserName": name,
        "PasswordHash": hash_password(password, salt),
        "Salt": salt,
        "Grants": grants,
    }


def fixture_v1() -> dict:
    department = {
        "Name": "Department",
        "SingularTitles": {"en": "Department", "cs": "Oddělení"},
        "PluralTitles": {"en": "Departments", "cs": "Oddělení"},
        "Description": "Organizational units",
        "DisplayColumn": "Name",
        "Columns": [
            col("Id", "int", pk=True, auto=True, titles={"en": "ID", "cs": "ID"}),
            col("Name", "varchar", max_length=50, titles={"en": "Name", "cs": "Název"}),
            col("Budget", "decimal", nullable=True, titles={"en": "Budget", "cs": "Rozpočet"}),
        ],
        "Rows": [["1", "Sales", "125000.50"], ["2", "Engineering", "980000.00"], ["3", "Legal", None]],
    }
    employee = {
        "Name": "Employee",
        "SingularTitles": {"en": "Employee", "cs": "Zaměstnanec"},
        "PluralTitles": {"en": "Employees", "cs": "Zaměstnanci"},
        "DisplayColumn": "Name",
        "Columns": [
            col("Id", "int", pk=True, auto=True, titles={"en": "ID", "cs": "ID"}),
            col("Name", "varchar", max_length=40, titles={"en": "Name", "cs": "Jméno"}),
            col("Age", "int", nullable=True, titles={"en": "Age", "cs": "Věk"}),
            col("DeptId", "int", nullable=True, ref=("Department", "Id"),
                titles={"en": "Department", "cs": "Oddělení"}),
            col("HiredAt", "datetime", nullable=True, titles={"en": "Hired", "cs": "Nástup"}),
            col("Active", "boolean", titles={"en": "Active", "cs": "Aktivní"}),
        ],
        "Rows": [
            ["1", "Alice", "34", "1", "2015-03-01T09:00:00Z", "true"],
            ["2", "Bob", "28", "2", "2019-07-15T09:00:00Z", "true"],
            ["3", "Carol", None, "2", None, "false"],
            ["4", "Dan", "45", None, "2010-01-04T08:30:00Z", "true"],
            ["5", "Eve", "31", "1", "2021-11-30T12:00:00Z", "true"],
        ],
    }
    project = {
        "Name": "Project",
        "SingularTitles": {"en": "Project"},
        "PluralTitles": {"en": "Projects"},
        "Columns": [
            col("Code", "varchar", pk=True, max_length=8, editable=False),
            col("Title", "text"),
            col("LeadId", "int", nullable=True, ref=("Employee", "Id"), titles={"en": "Lead"}),
            col("Created", "datetime", nullable=True, editable=False),
        ],
        "Rows": [
            ["APOLLO", "Moon landing", "1", "2020-01-01T00:00:00Z"],
            ["ZEUS", "Weather control", None, None],
        ],
    }
    all_grants = {t: [1, 2, 3, 4] for t in ("Department", "Employee", "Project")}
    return {
        "DefaultLanguage": "en",
        "Tables": [department, employee, project],
        "Users": [
            user("admin", "admin-pass", "a1" * 16, all_grants),
            user("reader", "reader-pass", "b2" * 16, {"Department": [1], "Employee": [1]}),
            user("clerk", "clerk-pass", "c3" * 16, {"Department": [1], "Employee": [1, 2, 3]}),
            user("guest", "guest-pass", "d4" * 16, {}),
        ],
    }


def fixture_v2() -> dict:
    """v1 plus one column (Employee.Email) and one table (Office)."""
    doc = copy.deepcopy(fixture_v1())
    employee = next(t for t in doc["Tables"] if t["Name"] == "Employee")
    employee["Columns"].append(col("Email", "varchar", nullable=True, max_length=80, titles={"en": "E-mail"}))
    for row in employee["Rows"]:
        row.append(f"{row[1].lower()}@example.com")
    doc["Tables"].append(
        {
            "Name": "Office",
            "SingularTitles": {"en": "Office"},
            "PluralTitles": {"en": "Offices"},
            "DisplayColumn": "City",
            "Columns": [col("Id", "int", pk=True, auto=True), col("City", "varchar", max_length=40)],
            "Rows": [["1", "Brno"], ["2", "Prague"]],
        }
    )
    for u in doc["Users"]:
        if u["UserName"] == "admin":
            u["Grants"]["Office"] = [1, 2, 3, 4]
    return doc


ADMIN = {"UserName": "admin", "Password": "admin-pass"}
READER = {"UserName": "reader", "Password": "reader-pass"}
CLERK = {"UserName": "clerk", "Password": "clerk-pass"}
GUEST = {"UserName": "guest", "Password": "guest-pass"}

H, R, S = "/rsp/ReadTableHeaders", "/rsp/ReadTable", "/rsp/Submit"


def read(who, table, skip=0, take=0, **extra):
    return {**who, "TableName": table, **extra, "Skip": skip, "Take": take}


def fields(table, *names):
    return [
        {"DataType": "text", "ID": f"{table}.{n}", "IsAutoGenerated": False, "IsDisplayField": False,
         "IsEditable": True, "IsForeignKey": False, "IsJoined": False, "IsNullable": True,
         "IsPrimaryKey": False, "Name": n, "Table": table, "Title": n}
        for n in names
    ]


def submit(who, table, op, names, data):
    return {**who, "TableName": table, "Operation": op, "Fields": fields(table, *names), "Data": data}


CASES = [
    CaseSpec("010_headers_admin", H, ADMIN),
    CaseSpec("011_headers_reader_cs", H, {**READER, "Language": "cs"}),
    CaseSpec("012_headers_guest_empty", H, GUEST),
    CaseSpec("013_headers_wrong_password", H, {"UserName": "admin", "Password": "nope"}),
    CaseSpec("014_headers_unknown_user", H, {"UserName": "mallory", "Password": "nope"}),
    CaseSpec("015_headers_language_fallback", H, {**ADMIN, "Language": "de"}),
    CaseSpec("020_read_employee_all", R, read(ADMIN, "Employee")),
    CaseSpec("021_read_employee_page", R, read(ADMIN, "Employee", 2, 2)),
    CaseSpec("022_read_employee_join_filter", R, read(ADMIN, "Employee", FilterExpression="Department.Name = 'Sales'")),
    CaseSpec("023_read_employee_order", R, read(ADMIN, "Employee", OrderExpression="DeptId, Age DESC")),
    CaseSpec("024_read_department_references", R, read(READER, "Department")),
    CaseSpec("025_read_employee_cs", R, read(READER, "Employee", Language="cs", FilterExpression="Age IS NULL OR Age > 40")),
    CaseSpec("026_read_project_no_display", R, read(ADMIN, "Project", OrderExpression="Code DESC"), compare="fields"),
    CaseSpec("027_read_bad_expression", R, read(ADMIN, "Employee", FilterExpression="Age >")),
    CaseSpec("028_read_like_on_int", R, read(ADMIN, "Employee", FilterExpression="Age LIKE '3%'")),
    CaseSpec("029_read_unknown_field", R, read(ADMIN, "Employee", OrderExpression="Salary")),
    CaseSpec("030_read_unknown_table", R, read(ADMIN, "Payroll")),
    CaseSpec("031_read_forbidden", R, read(GUEST, "Employee")),
    CaseSpec("032_read_missing_take", R, {**ADMIN, "TableName": "Employee", "Skip": 0}),
    CaseSpec("033_read_not_json", R, "{not json"),
    CaseSpec("040_submit_insert_employee", S,
             submit(CLERK, "Employee", 1, ["Name", "Age", "DeptId", "Active"], ["Frank", "29", "2", "true"])),
    CaseSpec("041_read_inserted", R, read(CLERK, "Employee", FilterExpression="Id = 6")),
    CaseSpec("042_submit_update_employee", S, submit(CLERK, "Employee", 2, ["Id", "Name", "DeptId"], ["6", "Frankie", None])),
    CaseSpec("043_read_updated", R, read(CLERK, "Employee", FilterExpression="Name LIKE 'Frank%'")),
    CaseSpec("044_submit_delete_referenced", S, submit(ADMIN, "Department", 3, ["Id"], ["1"])),
    CaseSpec("045_submit_delete_employee", S, submit(ADMIN, "Employee", 3, ["Id"], ["6"])),
    CaseSpec("046_read_after_delete", R, read(ADMIN, "Employee", FilterExpression="Id = 6")),
    CaseSpec("047_submit_forbidden", S, submit(READER, "Employee", 1, ["Name", "Active"], ["Zed", "true"])),
    CaseSpec("048_submit_bad_operation", S, submit(ADMIN, "Employee", 9, ["Id"], ["1"])),
    CaseSpec("049_submit_update_missing", S, submit(ADMIN, "Employee", 2, ["Id", "Name"], ["99", "Nobody"])),
    CaseSpec("050_submit_identity_supplied", S, submit(ADMIN, "Employee", 1, ["Id", "Name", "Active"], ["77", "X", "true"])),
    CaseSpec("051_submit_too_long", S, submit(ADMIN, "Department", 1, ["Name"], ["D" * 51])),
    CaseSpec("052_submit_insert_natural_key", S, submit(ADMIN, "Project", 1, ["Code", "Title", "LeadId"], ["HERMES", "Courier", "2"])),
    CaseSpec("053_submit_dangling_fk", S, submit(ADMIN, "Project", 1, ["Code", "Title", "LeadId"], ["ARES", "War", "42"])),
    CaseSpec("054_submit_update_not_editable", S, submit(ADMIN, "Project", 2, ["Code", "Created"], ["HERMES", "2024-01-01T00:00:00Z"])),
    CaseSpec("060_get_not_allowed", R, "", method="GET"),
    CaseSpec("061_unknown_endpoint", "/rsp/DropEverything", ADMIN),
]


def main(argv):
    corpus = Path(argv[1]) if len(argv) > 1 else ROOT / "corpus"
    fixtures = corpus / "fixtures"
    if corpus.exists():
        shutil.rmtree(corpus)
    fixtures.mkdir(parents=True)
    for name, doc in (("v1", fixture_v1()), ("v2", fixture_v2())):
        (fixtures / f"{name}.json").write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    config = ServiceConfig(listen_address="127.0.0.1:0", fixture_path=str(fixtures / "v1.json"), log_level="error")
    with serve(config) as handle:
        written = record_corpus(handle.url, CASES, corpus)
    print(f"recorded {len(written)} cases into {corpus}")


if __name__ == "__main__":
    main(sys.argv)
