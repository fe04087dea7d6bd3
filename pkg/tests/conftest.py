from __future__ import annotations

import contextlib
import copy
import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rsp.engine import Provider, load_fixture_state  # noqa: E402
from rsp.service import ServiceConfig, serve  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
V1 = CORPUS / "fixtures" / "v1.json"
V2 = CORPUS / "fixtures" / "v2.json"

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def v1_doc() -> dict:
    return json.loads(V1.read_text(encoding="utf-8"))


@pytest.fixture
def v1_state(v1_doc):
    return load_fixture_state(copy.deepcopy(v1_doc))


@pytest.fixture
def provider(v1_state):
    return Provider(v1_state)


def _start(fixture_path=None, provider=None):
    config = ServiceConfig(listen_address="127.0.0.1:0", fixture_path=str(fixture_path or V1), log_level="error")
    return serve(config, provider=provider)


@pytest.fixture
def service():
    handle = _start()
    yield handle
    handle.shutdown()


@pytest.fixture
def start_service():
    handles = []

    def start(fixture_path=None, provider=None):
        handle = _start(fixture_path, provider)
        handles.append(handle)
        return handle

    yield start
    for handle in handles:
        handle.shutdown()


@pytest.fixture
def criterion():
    """``with criterion("AC1 ..."):`` records a PASS/FAIL line for the terminal summary."""

    @contextlib.contextmanager
    def record(name: str):
        try:
            yield
        except BaseException as exc:
            _ACCEPTANCE_LINES.append(f"FAIL  {name}  ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})")
            raise
        _ACCEPTANCE_LINES.append(f"PASS  {name}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
