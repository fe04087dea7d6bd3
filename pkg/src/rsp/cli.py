"""``rsp`` command-line tool.

Exit codes: 0 success, 1 usage error, 2 remote/protocol/transport error,
3 conformance failures.
"""

from __future__ import annotations

import argparse
import os
import re
import signal
import sys
import threading
from typing import Optional, Sequence

from . import wire
from .client import ClientConfig, ClientError, RemoteError, RspClient
from .conformance import run_conformance
from .errors import FixtureError
from .render import FORMATS, render

EXIT_OK, EXIT_USAGE, EXIT_REMOTE, EXIT_CONFORMANCE = 0, 1, 2, 3

OPERATIONS = {"insert": wire.Operation.INSERT, "update": wire.Operation.UPDATE, "delete": wire.Operation.DELETE}
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def submit_from_pairs(pairs: Sequence[str], op: str = "insert") -> tuple[list[str], list[Optional[str]]]:
    """Split ``col=value`` / ``col:=null`` arguments into aligned name and data lists.

    ``col=`` is the empty string; only ``col:=null`` means null.
    """
    if op not in OPERATIONS:
        raise UsageError(f"operation must be one of {', '.join(OPERATIONS)}")
    names: list[str] = []
    data: list[Optional[str]] = []
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep:
            raise UsageError(f"expected col=value or col:=null, got {pair!r}")
        cell: Optional[str] = value
        if name.endswith(":"):
            if value != "null":
                raise UsageError(f"only col:=null is supported, got {pair!r}")
            name, cell = name[:-1], None
        if not _NAME_RE.fullmatch(name):
            raise UsageError(f"invalid column name in {pair!r}")
        if name in names:
            raise UsageError(f"column {name!r} given more than once")
        names.append(name)
        data.append(cell)
    return names, data


def _connection_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--url", default=os.environ.get("RSP_URL", "http://127.0.0.1:8080"))
    p.add_argument("--user", required=True)
    p.add_argument("--password", default=None, help="defaults to $RSP_PASSWORD")
    p.add_argument("--lang", default=None)
    p.add_argument("--timeout", type=float, default=10.0)
    p.add_argument("--ca-cert", default=None, help="CA bundle for verifying an HTTPS service")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rsp", description="Relational Schema Protocol tool")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("serve", help="run a provider from a fixture")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--fixture", default=None)
    p.add_argument("--listen", default=None)
    p.add_argument("--tls-cert", default=None)
    p.add_argument("--tls-key", default=None)
    p.add_argument("--lang", default=None, help="override the fixture's default language")
    p.add_argument("--log-level", choices=("error", "info", "debug"), default=None)

    p = sub.add_parser("headers", help="list accessible tables")
    _connection_args(p)
    p.add_argument("--format", choices=("table", "json"), default="table")

    p = sub.add_parser("read", help="read rows of a table")
    _connection_args(p)
    p.add_argument("--table", required=True)
    p.add_argument("--filter", default=None)
    p.add_argument("--order", default=None)
    p.add_argument("--skip", type=int, default=0)
    p.add_argument("--take", type=int, default=0)
    p.add_argument("--format", choices=FORMATS, default="table")

    p = sub.add_parser("submit", help="insert, update or delete one row")
    _connection_args(p)
    p.add_argument("--table", required=True)
    p.add_argument("--op", choices=tuple(OPERATIONS), required=True)
    p.add_argument("pairs", nargs="*", metavar="col=value")

    p = sub.add_parser("conformance", help="replay a golden corpus against an endpoint")
    p.add_argument("--url", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--evolution", action="store_true", help="only require decodable, same-outcome responses")
    p.add_argument("--ca-cert", default=None)
    return parser


def _client(args) -> RspClient:
    password = args.password if args.password is not None else os.environ.get("RSP_PASSWORD")
    if password is None:
        raise UsageError("a password is required (--password or RSP_PASSWORD)")
    if args.lang is not None and not re.fullmatch(r"[a-z]{2}", args.lang):
        raise UsageError("--lang must be a two-letter ISO 639-1 code")
    try:
        config = ClientConfig(
            base_url=args.url,
            user_name=args.user,
            password=password,
            language=args.lang,
            request_timeout=args.timeout,
            verify=args.ca_cert or True,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RspClient(config)


def _cmd_serve(args, out) -> int:
    from .service import configure_logging, load_config, serve

    try:
        config = load_config(
            args.config,
            listen_address=args.listen,
            fixture_path=args.fixture,
            tls_certificate_path=args.tls_cert,
            tls_key_path=args.tls_key,
            default_language_override=args.lang,
            log_level=args.log_level,
        )
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None
    if not config.fixture_path:
        raise UsageError("a fixture is required (--fixture, config file or RSP_FIXTURE)")
    configure_logging(config.log_level)
    try:
        handle = serve(config)
    except (FixtureError, OSError) as exc:
        print(f"rsp serve: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    stop = threading.Event()
    for sig in (signal.SIGINT, signal.SIGTERM):
        signal.signal(sig, lambda *_: stop.set())
    print(f"serving on {handle.url}", file=out, flush=True)
    stop.wait()
    handle.shutdown()
    return EXIT_OK


def _cmd_headers(args, out) -> int:
    with _client(args) as client:
        headers = client.fetch_headers()
    if args.format == "json":
        print(wire.encode(wire.ReadTableHeadersResponse(table_headers=tuple(headers))), file=out)
        return EXIT_OK
    width = max((len(h.table_name) for h in headers), default=0)
    for h in headers:
        print(f"{h.table_name.ljust(width)}  {h.plural_title}", file=out)
    return EXIT_OK


def _cmd_read(args, out) -> int:
    if args.skip < 0 or args.take < 0:
        raise UsageError("--skip and --take must be non-negative")
    with _client(args) as client:
        table = client.fetch_table(args.table, args.skip, args.take, args.filter, args.order)
    out.write(render(table, args.format))
    return EXIT_OK


def _cmd_submit(args, out) -> int:
    names, data = submit_from_pairs(args.pairs, args.op)
    with _client(args) as client:
        response = client.submit(args.table, OPERATIONS[args.op], names, data)
    if response.identity is not None:
        print(response.identity, file=out)
    return EXIT_OK


def _cmd_conformance(args, out) -> int:
    report = run_conformance(
        args.url, args.corpus, mode="evolution" if args.evolution else "golden", verify=args.ca_cert or True
    )
    for line in report.lines():
        print(line, file=out)
    return EXIT_OK if report.ok else EXIT_CONFORMANCE


_COMMANDS = {
    "serve": _cmd_serve,
    "headers": _cmd_headers,
    "read": _cmd_read,
    "submit": _cmd_submit,
    "conformance": _cmd_conformance,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"rsp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RemoteError as exc:
        print(f"rsp: remote error {exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_REMOTE
    except ClientError as exc:
        print(f"rsp: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
