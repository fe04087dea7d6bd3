"""Golden-corpus conformance runner and recorder.

Corpus layout::

    corpus/<case>/meta.json      {"Endpoint": "/rsp/ReadTable", "Compare": "exact"|"fields",
                                  "ExpectStatus": 200, "Method"?: "POST"}
    corpus/<case>/request.json   sent verbatim
    corpus/<case>/expected.json  recorded response body
    corpus/fixtures/v1.json, v2.json

Cases run in name order against one live endpoint, so submits in earlier
cases are visible to later ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import httpx

from . import wire
from .client import ssl_verify

RESPONSE_KINDS = {
    "/rsp/ReadTableHeaders": wire.ReadTableHeadersResponse,
    "/rsp/ReadTable": wire.ReadTableResponse,
    "/rsp/Submit": wire.SubmitResponse,
}

MODES = ("golden", "evolution")


@dataclass(frozen=True)
class Case:
    name: str
    path: Path
    endpoint: str
    compare: str
    expect_status: int
    method: str = "POST"

    @property
    def request_bytes(self) -> bytes:
        return (self.path / "request.json").read_bytes()

    @property
    def expected_text(self) -> str:
        return (self.path / "expected.json").read_text(encoding="utf-8")


@dataclass
class CaseResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    mode: str
    results: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def failed(self) -> int:
        return len(self.results) - self.passed

    @property
    def ok(self) -> bool:
        return bool(self.results) and self.failed == 0

    def lines(self) -> list[str]:
        out = [f"{'PASS' if r.passed else 'FAIL'} {r.name}{': ' + r.detail if r.detail else ''}" for r in self.results]
        out.append(f"{self.mode}: {self.passed} passed, {self.failed} failed, {len(self.results)} total")
        return out


def load_corpus(corpus_dir: Union[str, Path]) -> list[Case]:
    root = Path(corpus_dir)
    cases = []
    for meta_path in sorted(root.glob("*/meta.json")):
        case_dir = meta_path.parent
        if case_dir.name == "fixtures":
            continue
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        cases.append(
            Case(
                name=case_dir.name,
                path=case_dir,
                endpoint=meta["Endpoint"],
                compare=meta.get("Compare", "exact"),
                expect_status=int(meta["ExpectStatus"]),
                method=meta.get("Method", "POST"),
            )
        )
    return cases


def response_kind(endpoint: str, status: int):
    if status == 200 and endpoint in RESPONSE_KINDS:
        return RESPONSE_KINDS[endpoint]
    return wire.ErrorEnvelope


def canonical(kind, text: Union[str, bytes]) -> str:
    """Re-encode through the wire model so whitespace and member order never matter."""
    return wire.encode(wire.decode(kind, text))


def subset_match(expected, actual, path: str = "$") -> Optional[str]:
    """None when every member of ``expected`` appears equal in ``actual``; otherwise where it differs."""
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            return f"{path}: expected an object"
        for key, value in expected.items():
            if key not in actual:
                return f"{path}.{key}: missing"
            problem = subset_match(value, actual[key], f"{path}.{key}")
            if problem:
                return problem
        return None
    if isinstance(expected, list):
        if not isinstance(actual, list) or len(actual) != len(expected):
            return f"{path}: expected an array of {len(expected)}"
        for i, (e, a) in enumerate(zip(expected, actual)):
            problem = subset_match(e, a, f"{path}[{i}]")
            if problem:
                return problem
        return None
    if expected != actual:
        return f"{path}: expected {expected!r}, got {actual!r}"
    return None


def check_case(case: Case, status: int, body: bytes, mode: str = "golden") -> CaseResult:
    if status != case.expect_status:
        return CaseResult(case.name, False, f"status {status}, expected {case.expect_status}")
    kind = response_kind(case.endpoint, status)
    try:
        actual = wire.decode(kind, body)
    except Exception as exc:  # noqa: BLE001
        return CaseResult(case.name, False, f"response does not decode as {kind.__name__}: {exc}")
    try:
        expected = wire.decode(kind, case.expected_text)
    except Exception as exc:  # noqa: BLE001
        return CaseResult(case.name, False, f"expected.json does not decode as {kind.__name__}: {exc}")

    if mode == "evolution":
        # Same operation outcome and message format; content may differ with the schema.
        if isinstance(expected, wire.ErrorEnvelope) and actual.code != expected.code:
            return CaseResult(case.name, False, f"error code {actual.code}, expected {expected.code}")
        return CaseResult(case.name, True)

    if case.compare == "exact":
        if wire.encode(actual) != wire.encode(expected):
            return CaseResult(case.name, False, "body differs from expected.json")
        return CaseResult(case.name, True)
    if case.compare == "fields":
        problem = subset_match(wire.to_json_object(expected), wire.to_json_object(actual))
        return CaseResult(case.name, problem is None, problem or "")
    return CaseResult(case.name, False, f"unknown compare mode {case.compare!r}")


def run_conformance(
    url: str,
    corpus_dir: Union[str, Path],
    mode: str = "golden",
    timeout: float = 10.0,
    verify=True,
) -> Report:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    report = Report(mode)
    with httpx.Client(base_url=url.rstrip("/"), timeout=timeout, verify=ssl_verify(verify)) as http:
        for case in load_corpus(corpus_dir):
            try:
                reply = http.request(
                    case.method,
                    case.endpoint,
                    content=case.request_bytes,
                    headers={"Content-Type": "application/json; charset=utf-8"},
                )
            except httpx.HTTPError as exc:
                report.results.append(CaseResult(case.name, False, f"transport error: {type(exc).__name__}"))
                continue
            report.results.append(check_case(case, reply.status_code, reply.content, mode))
    return report


# --- recording -------------------------------------------------------------


@dataclass(frozen=True)
class CaseSpec:
    name: str
    endpoint: str
    request: Union[dict, str]  # a JSON object, or raw text for malformed-request cases
    compare: str = "exact"
    method: str = "POST"


def record_corpus(url: str, specs: list, out_dir: Union[str, Path], timeout: float = 10.0) -> list[Path]:
    """Replay ``specs`` in order against ``url`` and freeze the answers as corpus cases."""
    root = Path(out_dir)
    written = []
    with httpx.Client(base_url=url.rstrip("/"), timeout=timeout) as http:
        for spec in specs:
            body = spec.request if isinstance(spec.request, str) else wire.dump_json(spec.request)
            reply = http.request(
                spec.method,
                spec.endpoint,
                content=body.encode("utf-8"),
                headers={"Content-Type": "application/json; charset=utf-8"},
            )
            kind = response_kind(spec.endpoint, reply.status_code)
            case_dir = root / spec.name
            case_dir.mkdir(parents=True, exist_ok=True)
            meta = {"Endpoint": spec.endpoint, "Compare": spec.compare, "ExpectStatus": reply.status_code}
            if spec.method != "POST":
                meta["Method"] = spec.method
            (case_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
            (case_dir / "request.json").write_text(body, encoding="utf-8")
            (case_dir / "expected.json").write_text(canonical(kind, reply.content) + "\n", encoding="utf-8")
            written.append(case_dir)
    return written
