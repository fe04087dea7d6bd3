import csv
import io
import json
import os
import subprocess
import sys
import time

import pytest

from rsp import wire
from rsp.cli import UsageError, main, submit_from_pairs
from rsp.render import NULL_MARK, render, render_csv, render_table

from conftest import V1


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def conn(service, user="admin"):
    return ["--url", service.url, "--user", user, "--password", f"{user}-pass"]


def test_read_take_zero_prints_all_rows(service):
    code, out = run("read", *conn(service), "--table", "Employee", "--take", "0")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 6 and lines[0].startswith("ID")
    assert "↪Name" in lines[0]
    assert NULL_MARK in lines[3]


def test_unknown_flag_is_usage_error(service, capsys):
    code, _ = run("read", *conn(service), "--table", "Employee", "--bogus")
    assert code == 1
    assert "usage" in capsys.readouterr().err


def test_wrong_password_exit_2(service, capsys):
    code, _ = run("headers", "--url", service.url, "--user", "admin", "--password", "nope")
    assert code == 2
    err = capsys.readouterr().err
    assert "AuthFailed" in err and "nope" not in err


def test_unreachable_exit_2(capsys):
    code, _ = run("headers", "--url", "http://127.0.0.1:1", "--user", "a", "--password", "b", "--timeout", "1")
    assert code == 2


def test_password_from_environment(service, monkeypatch):
    monkeypatch.setenv("RSP_PASSWORD", "reader-pass")
    code, out = run("headers", "--url", service.url, "--user", "reader")
    assert code == 0 and out.split() == ["Department", "Departments", "Employee", "Employees"]


def test_missing_password_is_usage_error(service, monkeypatch):
    monkeypatch.delenv("RSP_PASSWORD", raising=False)
    assert run("headers", "--url", service.url, "--user", "reader")[0] == 1


def test_bad_language_is_usage_error(service):
    assert run("headers", *conn(service), "--lang", "czech")[0] == 1


def test_negative_take_is_usage_error(service):
    assert run("read", *conn(service), "--table", "Employee", "--take", "-1")[0] == 1


def test_headers_json(service):
    code, out = run("headers", *conn(service), "--format", "json")
    assert code == 0
    assert len(wire.decode("ReadTableHeadersResponse", out).table_headers) == 3


def test_formats_agree_on_cells(service):
    outputs = {fmt: run("read", *conn(service), "--table", "Employee", "--format", fmt)[1]
               for fmt in ("table", "csv", "json")}
    table = wire.decode("TableMessage", outputs["json"])
    cells = sorted(c for row in table.items for c in row if c is not None)
    csv_rows = list(csv.reader(io.StringIO(outputs["csv"], newline="")))
    assert csv_rows[0] == [f.name for f in table.fields]
    assert sorted(c for row in csv_rows[1:] for c in row if c != "") == cells
    grid = [line.split() for line in outputs["table"].splitlines()[1:]]
    assert sorted(c for row in grid for c in row if c != NULL_MARK) == cells


def test_filter_and_order_flags(service):
    code, out = run("read", *conn(service), "--table", "Employee", "--filter", "Age > 30",
                    "--order", "Age DESC", "--format", "csv")
    assert code == 0
    assert [line.split(",")[1] for line in out.splitlines()[1:]] == ["Dan", "Alice", "Eve"]


def test_bad_filter_exit_2(service, capsys):
    assert run("read", *conn(service), "--table", "Employee", "--filter", "Age >")[0] == 2
    assert "BadExpression" in capsys.readouterr().err


def test_submit_cycle(service):
    code, out = run("submit", *conn(service, "clerk"), "--table", "Employee", "--op", "insert",
                    "Name=O'Neil, Jr.", "Active=true", "DeptId:=null")
    assert code == 0 and out.strip() == "6"
    assert run("submit", *conn(service, "clerk"), "--table", "Employee", "--op", "update", "Id=6", "Age=50")[0] == 0
    code, out = run("read", *conn(service), "--table", "Employee", "--filter", "Id = 6", "--format", "csv")
    assert out.splitlines()[1].startswith('6,"O\'Neil, Jr.",50,')
    assert run("submit", *conn(service, "clerk"), "--table", "Employee", "--op", "delete", "Id=6")[0] == 2
    assert run("submit", *conn(service), "--table", "Employee", "--op", "delete", "Id=6")[0] == 0


def test_submit_pairs():
    assert submit_from_pairs(["Id=3", "Name=Zoe"]) == (["Id", "Name"], ["3", "Zoe"])
    assert submit_from_pairs(["Dept:=null"]) == (["Dept"], [None])
    assert submit_from_pairs(["Note=", "Expr=a=b"]) == (["Note", "Expr"], ["", "a=b"])


@pytest.mark.parametrize("pairs", [["Id=3", "Id=4"], ["Id"], ["=3"], ["Dept:=nil"], ["Bad Name=1"]])
def test_submit_pairs_errors(pairs):
    with pytest.raises(UsageError):
        submit_from_pairs(pairs)


def _table(items, joined=False):
    fields = (
        wire.Field(data_type="int", id="T.Id", name="Id", table="T", title="ID"),
        wire.Field(data_type="text", id="T.Note", name="Note", table="T", title="Note"),
        wire.Field(data_type="text", id="U.Name", name="Name", table="U", title="Name",
                   is_joined=True, is_display_field=True, is_editable=False),
    )
    return wire.TableMessage(header=wire.TableHeader(table_name="T", singular_title="t", plural_title="ts"),
                             fields=fields, items=items, actions=(1,))


def test_render_empty_table_is_header_only():
    assert render_table(_table([])) == "ID  Note  ↪Name\n"


def test_render_null_and_quoting():
    t = _table([["1", None, 'say "hi", bye'], ["2", "", "x\ny"]])
    assert render_table(t).splitlines()[1].split()[1] == NULL_MARK
    assert render_csv(t) == 'Id,Note,Name\r\n1,,"say ""hi"", bye"\r\n2,"","x\ny"\r\n'
    parsed = list(csv.reader(io.StringIO(render_csv(t), newline="")))
    assert parsed[1] == ["1", "", 'say "hi", bye'] and parsed[2] == ["2", "", "x\ny"]


def test_render_json_roundtrips():
    t = _table([["1", None, "é"]])
    assert wire.decode("TableMessage", render(t, "json")) == t
    with pytest.raises(ValueError):
        render(t, "xml")


def test_serve_subprocess_serves_fixture(tmp_path):
    env = {**os.environ, "PYTHONUNBUFFERED": "1"}
    proc = subprocess.Popen([sys.executable, "-m", "rsp", "serve", "--fixture", str(V1), "--listen", "127.0.0.1:0",
                             "--log-level", "error"], stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True, env=env)
    try:
        line = proc.stdout.readline()
        assert line.startswith("serving on http://127.0.0.1:")
        url = line.split()[-1]
        code, out = run("read", "--url", url, "--user", "admin", "--password", "admin-pass",
                        "--table", "Department", "--format", "json")
        assert code == 0
        doc = json.loads(V1.read_text())
        assert [list(r) for r in wire.decode("TableMessage", out).items] == doc["Tables"][0]["Rows"]
    finally:
        proc.terminate()
        assert proc.wait(10) == 0


def test_serve_requires_fixture(monkeypatch):
    monkeypatch.delenv("RSP_FIXTURE", raising=False)
    assert run("serve", "--listen", "127.0.0.1:0")[0] == 1


def test_serve_bad_fixture_exit_2(tmp_path):
    assert run("serve", "--fixture", str(tmp_path / "nope.json"), "--listen", "127.0.0.1:0")[0] == 2


def test_help_exits_zero(capsys):
    assert run("--help")[0] == 0
    assert "conformance" in capsys.readouterr().out
