import json
import random
import socket

import pytest

from randomdata import random_fixture
from rsp import wire
from rsp.client import ClientConfig, ProtocolError, RemoteError, RspClient, TransportError
from rsp.engine import Provider, authenticate, load_fixture_state, read_table, read_table_headers


def client_for(handle, user="admin", password=None, **kw):
    return RspClient(ClientConfig(handle.url, user, password or f"{user}-pass", **kw))


def test_reader_sees_two_of_three_tables(service):
    with client_for(service, "reader") as c:
        assert [h.table_name for h in c.fetch_headers()] == ["Department", "Employee"]


def test_headers_match_engine(service):
    state = service.provider.state
    with client_for(service, language="cs") as c:
        assert c.fetch_headers() == read_table_headers(state, authenticate(state, "admin", "admin-pass"), "cs")


def test_wrong_password(service):
    with client_for(service, password="nope") as c:
        with pytest.raises(RemoteError) as info:
            c.fetch_headers()
    assert info.value.code == "AuthFailed" and info.value.status == 401


def test_unreachable_host_is_transport_error():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    with RspClient(ClientConfig(f"http://127.0.0.1:{port}", "u", "p", request_timeout=1)) as c:
        with pytest.raises(TransportError):
            c.fetch_headers()


def test_take_zero_is_full_table(service):
    with client_for(service) as c:
        assert len(c.fetch_table("Employee", take=0).items) == 5


def test_remote_errors_propagate(service):
    with client_for(service) as c:
        for kwargs, code in [
            (dict(table_name="Employee", filter="Age >"), "BadExpression"),
            (dict(table_name="Payroll"), "UnknownTable"),
        ]:
            with pytest.raises(RemoteError) as info:
                c.fetch_table(**kwargs)
            assert info.value.code == code
    with client_for(service, "guest") as c:
        with pytest.raises(RemoteError, match="Forbidden"):
            c.fetch_table("Employee")


def test_loopback_equals_engine(service):
    state = service.provider.state
    principal = authenticate(state, "admin", "admin-pass")
    with client_for(service) as c:
        for filt, order, skip, take in [(None, None, 0, 0), ("Department.Name = 'Sales'", "Age DESC", 0, 0),
                                        ("Age IS NOT NULL", "Name", 1, 2)]:
            got = c.fetch_table("Employee", skip, take, filt, order)
            want = read_table(state, principal, wire.ReadTableRequest(
                user_name="admin", password="admin-pass", table_name="Employee",
                skip=skip, take=take, filter_expression=filt, order_expression=order))
            assert got == want


@pytest.mark.parametrize("rows, pages", [(5, [2, 2, 1]), (4, [2, 2, 0])])
def test_row_stream_pages(start_service, v1_doc, rows, pages):
    import copy

    doc = copy.deepcopy(v1_doc)
    doc["Tables"][1]["Rows"] = doc["Tables"][1]["Rows"][:rows]
    handle = start_service(provider=Provider(load_fixture_state(doc)))
    seen = []

    class Spy(RspClient):
        def fetch_table(self, *a, **kw):
            page = super().fetch_table(*a, **kw)
            seen.append(len(page.items))
            return page

    with Spy(ClientConfig(handle.url, "admin", "admin-pass")) as c:
        stream = c.fetch_all_rows("Employee", page_size=2)
        assert stream.fields is None
        out = list(stream)
        assert len(out) == rows and seen == pages and stream.pages_fetched == len(pages)
        assert out == list(c.fetch_table("Employee").items)
        assert stream.fields[0].id == "Employee.Id" and stream.actions == (1, 2, 3, 4)


def test_row_stream_random_fixtures(start_service):
    for seed in range(5):
        rng = random.Random(seed)
        handle = start_service(provider=Provider(load_fixture_state(random_fixture(rng, max_rows=15))))
        with RspClient(ClientConfig(handle.url, "admin", "pw")) as c:
            for name in (h.table_name for h in c.fetch_headers()):
                full = c.fetch_table(name).items
                assert tuple(c.fetch_all_rows(name, rng.randint(1, 4))) == full


def test_row_stream_propagates_failure(service):
    with client_for(service) as c:
        with pytest.raises(RemoteError):
            list(c.fetch_all_rows("Payroll", 2))
    with pytest.raises(ValueError):
        c.fetch_all_rows("Employee", 0)


def test_submit_lifecycle(service):
    with client_for(service, "clerk") as c:
        resp = c.submit("Employee", wire.Operation.INSERT, ["Name", "Active"], ["Zoe", "true"])
        assert resp.identity == "6"
        assert c.submit("Employee", wire.Operation.UPDATE, ["Id", "Age"], ["6", "40"]).identity is None
        with pytest.raises(RemoteError) as info:
            c.submit("Employee", wire.Operation.UPDATE, ["Id", "Age"], ["99", "40"])
        assert info.value.code == "NotFound"
    with client_for(service) as c:
        assert c.submit("Employee", wire.Operation.DELETE, ["Id"], ["6"]).identity is None
    with pytest.raises(ValueError):
        c.submit("Employee", 1, ["A"], [])


class _Garbage:
    def __init__(self, status, body):
        self.status, self.body = status, body

    def __enter__(self):
        from http.server import BaseHTTPRequestHandler, HTTPServer
        import threading

        outer = self

        class H(BaseHTTPRequestHandler):
            def do_POST(self):
                self.rfile.read(int(self.headers["Content-Length"]))
                self.send_response(outer.status)
                self.send_header("Content-Length", str(len(outer.body)))
                self.end_headers()
                self.wfile.write(outer.body)

            def log_message(self, *a):
                pass

        self.server = HTTPServer(("127.0.0.1", 0), H)
        threading.Thread(target=self.server.serve_forever, daemon=True).start()
        return f"http://127.0.0.1:{self.server.server_address[1]}"

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


@pytest.mark.parametrize("status, body", [(200, b"<html>"), (200, b'{"TableHeaders":[{}]}'), (502, b"bad gateway")])
def test_protocol_errors(status, body):
    with _Garbage(status, body) as url:
        with RspClient(ClientConfig(url, "u", "p")) as c:
            with pytest.raises(ProtocolError):
                c.fetch_headers()


def test_password_never_shown():
    config = ClientConfig("http://127.0.0.1:1", "u", "hunter2", request_timeout=0.5)
    assert "hunter2" not in repr(config)
    with RspClient(config) as c:
        with pytest.raises(TransportError) as info:
            c.fetch_headers()
    assert "hunter2" not in str(info.value)


def test_config_rejects_bad_scheme():
    with pytest.raises(ValueError):
        ClientConfig("ftp://x", "u", "p")


def test_placeholder_fields_are_sent(service):
    captured = {}
    with client_for(service) as c:
        original = c._http.post

        def spy(path, content, headers):
            captured["body"] = json.loads(content)
            return original(path, content=content, headers=headers)

        c._http.post = spy
        c.submit("Department", 1, ["Name"], ["Ops"])
    assert captured["body"]["Fields"][0]["ID"] == "Department.Name"
    assert captured["body"]["Data"] == ["Ops"]
