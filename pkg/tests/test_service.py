import datetime as dt
import json
import logging
import random
import ssl
import threading
import time

import httpx
import pytest

from rsp import wire
from rsp.engine import Provider
from rsp.errors import (
    AuthFailed,
    BadExpression,
    BadOperation,
    ConstraintViolation,
    CorruptCell,
    FixtureError,
    Forbidden,
    MalformedMessage,
    NotFound,
    UnknownField,
    UnknownTable,
)
from rsp.service import Router, ServiceConfig, load_config, map_error, serve

from conftest import V1

ADMIN = {"UserName": "admin", "Password": "admin-pass"}


def post(url, path, body):
    data = body if isinstance(body, (bytes, str)) else json.dumps(body)
    return httpx.post(url + path, content=data, timeout=10)


@pytest.mark.parametrize(
    "error, status",
    [
        (MalformedMessage("x"), 400),
        (BadExpression("x"), 400),
        (UnknownField("x"), 400),
        (BadOperation("x"), 400),
        (AuthFailed(), 401),
        (Forbidden("x"), 403),
        (UnknownTable("x"), 404),
        (NotFound("x"), 404),
        (ConstraintViolation("x"), 409),
    ],
)
def test_error_mapping(error, status):
    got, envelope = map_error(error)
    assert got == status and envelope.code == type(error).__name__


def test_unexpected_errors_hide_details():
    status, envelope = map_error(CorruptCell("Employee.Age: '01' secret detail"))
    assert status == 500 and "secret" not in envelope.message
    status, envelope = map_error(KeyError("boom"))
    assert status == 500 and envelope.code == "MalformedMessage"


def test_router_without_sockets(provider):
    router = Router(provider)
    status, body = router.route("POST", "/rsp/ReadTableHeaders", json.dumps(ADMIN).encode())
    assert status == 200
    assert len(wire.decode("ReadTableHeadersResponse", body).table_headers) == 3
    assert router.route("GET", "/rsp/ReadTable", b"")[0] == 405
    assert router.route("POST", "/other", b"{}")[0] == 404


def test_headers_over_http(service):
    r = post(service.url, "/rsp/ReadTableHeaders", ADMIN)
    assert r.status_code == 200
    assert r.headers["content-type"].startswith("application/json")
    assert [h.table_name for h in wire.decode("ReadTableHeadersResponse", r.content).table_headers] == [
        "Department", "Employee", "Project"]


def test_get_is_405(service):
    r = httpx.get(service.url + "/rsp/ReadTable")
    assert r.status_code == 405
    assert wire.decode("ErrorEnvelope", r.content).code == "MalformedMessage"


def test_unknown_path_is_404(service):
    r = post(service.url, "/rsp/Nope", ADMIN)
    assert r.status_code == 404 and wire.decode("ErrorEnvelope", r.content).code == "NotFound"


def test_bad_operation_is_400(service):
    body = {**ADMIN, "TableName": "Employee", "Operation": 9, "Fields": [], "Data": []}
    r = post(service.url, "/rsp/Submit", body)
    assert r.status_code == 400 and wire.decode("ErrorEnvelope", r.content).code == "BadOperation"


def test_wrong_password_is_401(service):
    r = post(service.url, "/rsp/ReadTableHeaders", {"UserName": "admin", "Password": "guess"})
    assert r.status_code == 401
    assert "guess" not in r.text


def test_fuzzed_bodies_always_get_envelopes(service):
    rng = random.Random(11)
    valid = json.dumps({**ADMIN, "TableName": "Employee", "Skip": 0, "Take": 0})
    before = service.provider.state_hash()
    with httpx.Client(base_url=service.url, timeout=10) as http:
        for _ in range(200):
            raw = bytearray(valid.encode())
            for _ in range(rng.randint(1, 5)):
                op = rng.random()
                pos = rng.randrange(len(raw)) if raw else 0
                if op < 0.4 and raw:
                    del raw[pos]
                elif op < 0.8:
                    raw.insert(pos, rng.randrange(256))
                else:
                    raw = raw[:pos]
            path = rng.choice(["/rsp/ReadTable", "/rsp/Submit", "/rsp/ReadTableHeaders"])
            r = http.post(path, content=bytes(raw))
            if r.status_code >= 400:
                envelope = wire.decode("ErrorEnvelope", r.content)
                assert r.status_code != 500, envelope
            else:
                assert r.status_code == 200
    assert service.provider.state_hash() == before


def test_deeply_nested_json_is_malformed(service):
    r = post(service.url, "/rsp/ReadTable", "[" * 100000 + "]" * 100000)
    assert r.status_code == 400


def test_one_log_line_per_exchange_without_password(service, caplog):
    caplog.set_level(logging.INFO, logger="rsp.service")
    post(service.url, "/rsp/ReadTableHeaders", {"UserName": "admin", "Password": "s3cr3t-value"})
    post(service.url, "/rsp/ReadTable", {**ADMIN, "TableName": "Employee", "Skip": 0, "Take": 1})
    lines = [json.loads(r.getMessage()) for r in caplog.records if r.getMessage().startswith("{")]
    assert [(l["user"], l["path"], l["status"]) for l in lines] == [
        ("admin", "/rsp/ReadTableHeaders", 401), ("admin", "/rsp/ReadTable", 200)]
    assert set(lines[0]) == {"ts", "user", "method", "path", "status", "duration_ms"}
    assert "s3cr3t-value" not in caplog.text and "admin-pass" not in caplog.text


def test_plain_http_warns(caplog):
    caplog.set_level(logging.WARNING, logger="rsp.service")
    with serve(ServiceConfig(listen_address="127.0.0.1:0", fixture_path=str(V1))):
        pass
    assert "use HTTPS" in caplog.text


def test_bad_fixture_fails_before_listening(tmp_path):
    with pytest.raises(FixtureError):
        serve(ServiceConfig(listen_address="127.0.0.1:0", fixture_path=str(tmp_path / "missing.json")))


def test_busy_port_fails(service):
    host, port = service.address
    with pytest.raises(OSError):
        serve(ServiceConfig(listen_address=f"{host}:{port}", fixture_path=str(V1)))


def test_default_language_override(start_service):
    handle = serve(ServiceConfig(listen_address="127.0.0.1:0", fixture_path=str(V1), default_language_override="cs"))
    try:
        r = post(handle.url, "/rsp/ReadTableHeaders", ADMIN)
        titles = {h.table_name: h.plural_title for h in wire.decode("ReadTableHeadersResponse", r.content).table_headers}
        assert titles["Employee"] == "Zaměstnanci"
    finally:
        handle.shutdown()


class SlowProvider(Provider):
    def __init__(self, state, started):
        super().__init__(state)
        self.started = started

    def read_table(self, request):
        self.started.set()
        time.sleep(0.5)
        return super().read_table(request)


def test_shutdown_lets_in_flight_request_finish(v1_state):
    started = threading.Event()
    handle = serve(ServiceConfig(listen_address="127.0.0.1:0", fixture_path=str(V1)),
                   provider=SlowProvider(v1_state, started))
    result = {}

    def call():
        result["r"] = post(handle.url, "/rsp/ReadTable", {**ADMIN, "TableName": "Employee", "Skip": 0, "Take": 0})

    t = threading.Thread(target=call)
    t.start()
    assert started.wait(5)
    handle.shutdown()
    t.join(5)
    assert result["r"].status_code == 200
    assert len(wire.decode("ReadTableResponse", result["r"].content).table.items) == 5
    with pytest.raises(httpx.TransportError):
        httpx.post(handle.url + "/rsp/ReadTableHeaders", content=json.dumps(ADMIN), timeout=2)


def test_shutdown_with_idle_keepalive_connection(service):
    with httpx.Client(base_url=service.url) as http:
        assert http.post("/rsp/ReadTableHeaders", content=json.dumps(ADMIN)).status_code == 200
        started = time.monotonic()
        service.shutdown()
        assert time.monotonic() - started < 5


def _self_signed(tmp_path):
    from cryptography import x509
    from cryptography.hazmat.primitives import hashes, serialization
    from cryptography.hazmat.primitives.asymmetric import ec
    from cryptography.x509.oid import NameOID
    import ipaddress

    key = ec.generate_private_key(ec.SECP256R1())
    name = x509.Name([x509.NameAttribute(NameOID.COMMON_NAME, "127.0.0.1")])
    now = dt.datetime.now(dt.timezone.utc)
    cert = (
        x509.CertificateBuilder()
        .subject_name(name)
        .issuer_name(name)
        .public_key(key.public_key())
        .serial_number(x509.random_serial_number())
        .not_valid_before(now - dt.timedelta(days=1))
        .not_valid_after(now + dt.timedelta(days=1))
        .add_extension(x509.SubjectAlternativeName([x509.IPAddress(ipaddress.ip_address("127.0.0.1"))]), critical=False)
        .add_extension(x509.BasicConstraints(ca=True, path_length=None), critical=True)
        .sign(key, hashes.SHA256())
    )
    cert_path, key_path = tmp_path / "cert.pem", tmp_path / "key.pem"
    cert_path.write_bytes(cert.public_bytes(serialization.Encoding.PEM))
    key_path.write_bytes(key.private_bytes(serialization.Encoding.PEM, serialization.PrivateFormat.PKCS8,
                                           serialization.NoEncryption()))
    return cert_path, key_path


def test_tls(tmp_path):
    cert, key = _self_signed(tmp_path)
    config = ServiceConfig(listen_address="127.0.0.1:0", fixture_path=str(V1),
                           tls_certificate_path=str(cert), tls_key_path=str(key))
    with serve(config) as handle:
        assert handle.url.startswith("https://")
        r = httpx.post(handle.url + "/rsp/ReadTableHeaders", content=json.dumps(ADMIN), verify=ssl.create_default_context(cafile=str(cert)))
        assert r.status_code == 200
        with pytest.raises(httpx.ConnectError):
            httpx.post(handle.url + "/rsp/ReadTableHeaders", content=json.dumps(ADMIN))


def test_bad_tls_material(tmp_path):
    junk = tmp_path / "junk.pem"
    junk.write_text("not a certificate")
    with pytest.raises(OSError):
        serve(ServiceConfig(listen_address="127.0.0.1:0", fixture_path=str(V1),
                            tls_certificate_path=str(junk), tls_key_path=str(junk)))


def test_config_layers(tmp_path):
    cfg = tmp_path / "rsp.json"
    cfg.write_text(json.dumps({"Listen": "0.0.0.0:9000", "Fixture": "a.json", "LogLevel": "debug"}))
    c = load_config(str(cfg), env={})
    assert (c.listen_address, c.fixture_path, c.log_level) == ("0.0.0.0:9000", "a.json", "debug")
    c = load_config(str(cfg), env={"RSP_LISTEN": "127.0.0.1:1", "RSP_FIXTURE": "b.json"})
    assert (c.listen_address, c.fixture_path) == ("127.0.0.1:1", "b.json")
    c = load_config(str(cfg), env={"RSP_LISTEN": "127.0.0.1:1"}, listen_address="127.0.0.1:2")
    assert c.listen_address == "127.0.0.1:2"


@pytest.mark.parametrize(
    "kwargs",
    [dict(listen_address="nowhere"), dict(log_level="loud"), dict(tls_certificate_path="c.pem")],
)
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        ServiceConfig(**kwargs)
