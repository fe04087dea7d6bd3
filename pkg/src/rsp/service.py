"""HTTP binding of the provider: three POST endpoints under ``/rsp/``.

Every response body is either the operation's response message or an
ErrorEnvelope, always ``application/json; charset=utf-8``.
"""

from __future__ import annotations

import json
import logging
import os
import socket
import ssl
import threading
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Mapping, Optional

from . import wire
from .engine import Provider, load_fixture_file
from .errors import ERROR_CLASSES, MalformedMessage, NotFound, RspError

log = logging.getLogger("rsp.service")

CONTENT_TYPE = "application/json; charset=utf-8"
MAX_BODY_BYTES = 16 * 1024 * 1024

STATUS_BY_CODE = {
    "MalformedMessage": 400,
    "BadExpression": 400,
    "UnknownField": 400,
    "BadOperation": 400,
    "AuthFailed": 401,
    "Forbidden": 403,
    "UnknownTable": 404,
    "NotFound": 404,
    "ConstraintViolation": 409,
}

ENDPOINTS = {
    "/rsp/ReadTableHeaders": (wire.ReadTableHeadersRequest, "read_table_headers"),
    "/rsp/ReadTable": (wire.ReadTableRequest, "read_table"),
    "/rsp/Submit": (wire.SubmitRequest, "submit"),
}

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


# --- configuration ---------------------------------------------------------


@dataclass(frozen=True)
class ServiceConfig:
    listen_address: str = "127.0.0.1:8080"
    fixture_path: str = ""
    tls_certificate_path: Optional[str] = None
    tls_key_path: Optional[str] = None
    default_language_override: Optional[str] = None
    log_level: str = "info"

    def __post_init__(self):
        if (self.tls_certificate_path is None) != (self.tls_key_path is None):
            raise ValueError("TLS certificate and key must be configured together")
        if self.log_level not in LOG_LEVELS:
            raise ValueError(f"log level must be one of {', '.join(LOG_LEVELS)}")
        host_port(self.listen_address)

    @property
    def tls(self) -> bool:
        return self.tls_certificate_path is not None


def host_port(address: str) -> tuple[str, int]:
    host, sep, port = address.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"listen address must be host:port, got {address!r}")
    return host or "0.0.0.0", int(port)


_CONFIG_KEYS = {
    "Listen": "listen_address",
    "Fixture": "fixture_path",
    "TlsCertificate": "tls_certificate_path",
    "TlsKey": "tls_key_path",
    "DefaultLanguage": "default_language_override",
    "LogLevel": "log_level",
}

_ENV_KEYS = {"RSP_LISTEN": "listen_address", "RSP_FIXTURE": "fixture_path", "RSP_LOG_LEVEL": "log_level"}


def load_config(
    config_file: Optional[str] = None,
    env: Optional[Mapping[str, str]] = None,
    **overrides,
) -> ServiceConfig:
    """Defaults, then the JSON config file, then ``RSP_*`` environment, then explicit overrides."""
    values: dict = {}
    if config_file:
        doc = json.loads(Path(config_file).read_text(encoding="utf-8"))
        for key, attr in _CONFIG_KEYS.items():
            if key in doc:
                values[attr] = doc[key]
    env = os.environ if env is None else env
    for key, attr in _ENV_KEYS.items():
        if env.get(key):
            values[attr] = env[key]
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ServiceConfig(**values)


# --- request routing -------------------------------------------------------


def map_error(error: Exception) -> tuple[int, wire.ErrorEnvelope]:
    if isinstance(error, RspError) and error.code in ERROR_CLASSES:
        return STATUS_BY_CODE[error.code], wire.ErrorEnvelope(code=error.code, message=error.message)
    # Anything else is a provider bug; its details stay in the server log.
    return 500, wire.ErrorEnvelope(code="MalformedMessage", message="internal provider error")


def _envelope(status: int, code: str, message: str) -> tuple[int, bytes]:
    return status, wire.encode(wire.ErrorEnvelope(code=code, message=message)).encode("utf-8")


class Router:
    """Pure request dispatch, independent of any socket."""

    def __init__(self, provider: Provider):
        self.provider = provider

    def route(self, method: str, path: str, body: bytes) -> tuple[int, bytes]:
        endpoint = ENDPOINTS.get(path)
        if endpoint is None:
            return _envelope(404, NotFound.code, f"no endpoint at {path}")
        if method != "POST":
            return _envelope(405, MalformedMessage.code, f"{path} accepts POST only")
        request_type, operation = endpoint
        try:
            request = wire.decode(request_type, body)
            response = getattr(self.provider, operation)(request)
            return 200, wire.encode(response).encode("utf-8")
        except Exception as exc:  # noqa: BLE001 - every failure becomes an envelope
            status, envelope = map_error(exc)
            if status == 500:
                log.exception("internal error on %s", path)
            return status, wire.encode(envelope).encode("utf-8")


def _user_of(body: bytes) -> Optional[str]:
    try:
        doc = json.loads(body)
    except (ValueError, RecursionError):
        return None
    user = doc.get("UserName") if isinstance(doc, dict) else None
    return user if isinstance(user, str) else None


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "rsp"
    sys_version = ""
    timeout = 30  # idle keep-alive limit
    disable_nagle_algorithm = True  # headers and body go out as separate writes
    busy = False

    def handle(self):
        self.server.track(self, True)
        try:
            super().handle()
        finally:
            self.server.track(self, False)

    def parse_request(self):
        self.busy = True
        return super().parse_request()

    def _handle(self, method: str):
        started = time.monotonic()
        if self.server.closing:
            self.close_connection = True
        try:
            length = int(self.headers.get("Content-Length") or 0)
        except ValueError:
            length = -1
        if length < 0 or length > MAX_BODY_BYTES:
            status, body = _envelope(400, MalformedMessage.code, "missing or oversized request body")
            request_body = b""
            self.close_connection = True
        else:
            request_body = self.rfile.read(length) if length else b""
            status, body = self.server.router.route(method, self.path, request_body)
        self.send_response(status)
        self.send_header("Content-Type", CONTENT_TYPE)
        self.send_header("Content-Length", str(len(body)))
        if self.close_connection:
            self.send_header("Connection", "close")
        self.end_headers()
        if method != "HEAD":
            self.wfile.write(body)
        self.wfile.flush()
        self.busy = False
        log.info(
            json.dumps(
                {
                    "ts": datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
                    "user": _user_of(request_body),
                    "method": method,
                    "path": self.path,
                    "status": status,
                    "duration_ms": round((time.monotonic() - started) * 1000, 3),
                }
            )
        )

    def do_POST(self):
        self._handle("POST")

    def do_GET(self):
        self._handle("GET")

    def do_HEAD(self):
        self._handle("HEAD")

    def do_PUT(self):
        self._handle("PUT")

    def do_DELETE(self):
        self._handle("DELETE")

    def do_PATCH(self):
        self._handle("PATCH")

    def do_OPTIONS(self):
        self._handle("OPTIONS")

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        log.debug("http: " + format, *args)


class _Server(ThreadingHTTPServer):
    # Non-daemon handler threads joined on close: in-flight requests finish.
    daemon_threads = False
    block_on_close = True

    def __init__(self, address, router: Router):
        self.router = router
        self.closing = False
        self._connections: set = set()
        self._connections_lock = threading.Lock()
        super().__init__(address, _Handler)

    def track(self, handler, alive: bool) -> None:
        with self._connections_lock:
            if alive:
                self._connections.add(handler)
            else:
                self._connections.discard(handler)

    def drop_idle_connections(self) -> None:
        """Unblock keep-alive handlers waiting for a next request."""
        self.closing = True
        with self._connections_lock:
            idle = [h for h in self._connections if not h.busy]
        for handler in idle:
            try:
                handler.connection.shutdown(socket.SHUT_RD)
            except OSError:
                pass


# --- lifecycle -------------------------------------------------------------


class ServiceHandle:
    def __init__(self, server: _Server, provider: Provider, tls: bool):
        self._server = server
        self.provider = provider
        self.tls = tls
        self._thread = threading.Thread(target=server.serve_forever, args=(0.05,), name="rsp-service", daemon=True)
        self._thread.start()
        self._closed = False

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    @property
    def url(self) -> str:
        host, port = self.address
        return f"{'https' if self.tls else 'http'}://{host}:{port}"

    def shutdown(self) -> None:
        """Stop accepting, let in-flight exchanges complete, close the listener."""
        if self._closed:
            return
        self._closed = True
        self._server.shutdown()
        self._thread.join()
        self._server.drop_idle_connections()
        self._server.server_close()

    def wait(self) -> None:
        self._thread.join()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()


def configure_logging(level: str) -> None:
    logging.basicConfig(format="%(message)s")
    logging.getLogger("rsp").setLevel(LOG_LEVELS[level])


def serve(config: ServiceConfig, provider: Optional[Provider] = None) -> ServiceHandle:
    """Start the service; startup problems raise before any handle exists.

    ``provider`` lets callers share an already-loaded store; otherwise the
    fixture named by the config is loaded.
    """
    if provider is None:
        state = load_fixture_file(config.fixture_path)
        if config.default_language_override:
            state = replace(state, default_language=config.default_language_override)
        provider = Provider(state)
    server = _Server(host_port(config.listen_address), Router(provider))
    try:
        if config.tls:
            context = ssl.SSLContext(ssl.PROTOCOL_TLS_SERVER)
            context.load_cert_chain(config.tls_certificate_path, config.tls_key_path)
            server.socket = context.wrap_socket(server.socket, server_side=True)
        else:
            log.warning(
                "serving plain HTTP: credentials cross the network in cleartext; "
                "use HTTPS by configuring a TLS certificate and key"
            )
    except (OSError, ssl.SSLError):
        server.server_close()
        raise
    handle = ServiceHandle(server, provider, config.tls)
    log.info("listening on %s", handle.url)
    return handle
