"""Typed client SDK for an RSP service over HTTP(S)."""

from __future__ import annotations

import logging
import ssl
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence
from urllib.parse import urlparse

import httpx

from . import wire
from .errors import MalformedMessage

log = logging.getLogger("rsp.client")


class ClientError(Exception):
    """Base class of everything the client raises."""


class TransportError(ClientError):
    """The exchange did not complete (connection refused, timeout, TLS failure...)."""


class ProtocolError(ClientError):
    """The service answered with something that is not a valid RSP response."""


class RemoteError(ClientError):
    """The service answered with an ErrorEnvelope."""

    def __init__(self, code: str, message: str, status: int):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.status = status


@dataclass(frozen=True)
class ClientConfig:
    base_url: str
    user_name: str
    password: str = field(repr=False)
    language: Optional[str] = None
    request_timeout: float = 10.0
    verify: object = True  # passed to httpx: bool, CA bundle path or SSLContext

    def __post_init__(self):
        if urlparse(self.base_url).scheme not in ("http", "https"):
            raise ValueError("base_url must use http or https")


def ssl_verify(verify):
    # httpx wants an SSLContext for a custom CA bundle
    if isinstance(verify, str):
        return ssl.create_default_context(cafile=verify)
    return verify


class RspClient:
    """Thread-safe; one connection pool per instance."""

    def __init__(self, config: ClientConfig):
        self.config = config
        self._http = httpx.Client(
            base_url=config.base_url.rstrip("/"),
            timeout=config.request_timeout,
            verify=ssl_verify(config.verify),
        )

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- transport --

    def call(self, operation: str, request, response_type):
        """POST ``request`` to ``/rsp/<operation>`` and decode the answer."""
        body = wire.encode(request).encode("utf-8")
        try:
            reply = self._http.post(
                f"/rsp/{operation}",
                content=body,
                headers={"Content-Type": "application/json; charset=utf-8"},
            )
        except httpx.HTTPError as exc:
            raise TransportError(f"{operation}: {type(exc).__name__}") from None
        log.debug("%s -> %s", operation, reply.status_code)
        if reply.status_code == 200:
            try:
                return wire.decode(response_type, reply.content)
            except MalformedMessage as exc:
                raise ProtocolError(f"{operation}: undecodable response ({exc.message})") from None
        try:
            envelope = wire.decode(wire.ErrorEnvelope, reply.content)
        except Exception:
            raise ProtocolError(f"{operation}: HTTP {reply.status_code} without an error envelope") from None
        raise RemoteError(envelope.code, envelope.message, reply.status_code)

    # -- operations --

    def fetch_headers(self) -> list[wire.TableHeader]:
        request = wire.ReadTableHeadersRequest(
            user_name=self.config.user_name, password=self.config.password, language=self.config.language
        )
        return list(self.call("ReadTableHeaders", request, wire.ReadTableHeadersResponse).table_headers)

    def fetch_table(
        self,
        table_name: str,
        skip: int = 0,
        take: int = 0,
        filter: Optional[str] = None,  # noqa: A002 - protocol vocabulary
        order: Optional[str] = None,
    ) -> wire.TableMessage:
        if skip < 0 or take < 0:
            raise ValueError("skip and take must be non-negative")
        request = wire.ReadTableRequest(
            user_name=self.config.user_name,
            password=self.config.password,
            table_name=table_name,
            language=self.config.language,
            skip=skip,
            take=take,
            order_expression=order,
            filter_expression=filter,
        )
        return self.call("ReadTable", request, wire.ReadTableResponse).table

    def fetch_all_rows(
        self,
        table_name: str,
        page_size: int,
        filter: Optional[str] = None,  # noqa: A002
        order: Optional[str] = None,
    ) -> "RowStream":
        if page_size < 1:
            raise ValueError("page_size must be at least 1")
        return RowStream(self, table_name, page_size, filter, order)

    def submit(
        self,
        table_name: str,
        operation: int,
        field_names: Sequence[str],
        data: Sequence[Optional[str]],
    ) -> wire.SubmitResponse:
        if len(field_names) != len(data):
            raise ValueError("field_names and data must have the same length")
        request = wire.SubmitRequest(
            user_name=self.config.user_name,
            password=self.config.password,
            table_name=table_name,
            operation=int(operation),
            fields=tuple(wire.placeholder_field(table_name, name) for name in field_names),
            data=tuple(data),
        )
        return self.call("Submit", request, wire.SubmitResponse)


class RowStream:
    """Lazily paged rows of one table.

    Pages are requested as ``skip = i * page_size, take = page_size`` until a
    short (possibly empty) page arrives.  ``fields``, ``references``,
    ``header`` and ``actions`` come from the first page and are ``None``
    until iteration starts.
    """

    def __init__(self, client: RspClient, table_name: str, page_size: int, filter, order):
        self._client = client
        self.table_name = table_name
        self.page_size = page_size
        self._filter = filter
        self._order = order
        self.fields = self.references = self.header = self.actions = None
        self.pages_fetched = 0

    def __iter__(self) -> Iterator[tuple]:
        skip = 0
        while True:
            page = self._client.fetch_table(self.table_name, skip, self.page_size, self._filter, self._order)
            if self.pages_fetched == 0:
                self.fields, self.references = page.fields, page.references
                self.header, self.actions = page.header, page.actions
            self.pages_fetched += 1
            yield from page.items
            if len(page.items) < self.page_size:
                return
            skip += self.page_size
