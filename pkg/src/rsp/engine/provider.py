"""Thread-safe provider wrapping a :class:`StoreState` behind the wire messages."""

from __future__ import annotations

import threading

from ..wire import (
    ReadTableHeadersRequest,
    ReadTableHeadersResponse,
    ReadTableRequest,
    ReadTableResponse,
    SubmitRequest,
    SubmitResponse,
)
from . import operations
from .state import StoreState, authenticate, state_hash


class Provider:
    """Single writer, many readers.

    Readers take the current state reference (an immutable snapshot) without
    locking; submits are serialized by ``_write_lock`` and publish a new state
    with one reference assignment.
    """

    def __init__(self, state: StoreState):
        self._state = state
        self._write_lock = threading.Lock()

    @property
    def state(self) -> StoreState:
        return self._state

    def state_hash(self) -> str:
        return state_hash(self._state)

    def read_table_headers(self, request: ReadTableHeadersRequest) -> ReadTableHeadersResponse:
        state = self._state
        principal = authenticate(state, request.user_name, request.password)
        headers = operations.read_table_headers(state, principal, request.language)
        return ReadTableHeadersResponse(table_headers=tuple(headers))

    def read_table(self, request: ReadTableRequest) -> ReadTableResponse:
        state = self._state
        principal = authenticate(state, request.user_name, request.password)
        return ReadTableResponse(table=operations.read_table(state, principal, request))

    def submit(self, request: SubmitRequest) -> SubmitResponse:
        principal = authenticate(self._state, request.user_name, request.password)
        with self._write_lock:
            new_state, response = operations.submit(self._state, principal, request)
            self._state = new_state
        return response
