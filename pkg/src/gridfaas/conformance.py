"""Wire-protocol conformance suite for runtime hosts.

A runtime host implementation conforms when, for the same ordered sequence
of specialize/invoke requests, it produces byte-identical observations to
the builtin-test host: same status codes, same content types, same bodies,
same request-id echo behavior. Timing never enters the comparison.

Each session runs against a fresh host so not-specialized and stateful
counter behavior start from a clean slate. The caller supplies how a code
reference is spelled for the host under test (a registry name for the
builtin host, a handler file path for an external one).
"""

from __future__ import annotations

import http.client
import json
from dataclasses import dataclass

from .runtimehost import REQUEST_ID_HEADER

CONFORMANCE_REQUEST_ID = "conformance-0001"


@dataclass(frozen=True)
class WireObservation:
    """One response as seen on the wire, stripped of timing."""

    label: str
    status: int
    content_type: str
    body: bytes
    request_id_echoed: bool


def _post(endpoint: str, path: str, payload: dict) -> tuple[int, str, bytes, bool]:
    host, port = endpoint.rsplit(":", 1)
    conn = http.client.HTTPConnection(host, int(port), timeout=10.0)
    try:
        conn.request(
            "POST",
            path,
            body=json.dumps(payload).encode("utf-8"),
            headers={
                "Content-Type": "application/json",
                REQUEST_ID_HEADER: CONFORMANCE_REQUEST_ID,
            },
        )
        resp = conn.getresponse()
        body = resp.read()
        echoed = resp.getheader(REQUEST_ID_HEADER) == CONFORMANCE_REQUEST_ID
        return resp.status, resp.getheader("Content-Type") or "", body, echoed
    finally:
        conn.close()


def _observe(label: str, endpoint: str, path: str, payload: dict) -> WireObservation:
    status, content_type, body, echoed = _post(endpoint, path, payload)
    return WireObservation(label, status, content_type, body, echoed)


def _specialize(label: str, endpoint: str, code_ref: str) -> WireObservation:
    return _observe(label, endpoint, "/specialize", {"code_path": code_ref, "entry": "main"})


def echo_session(endpoint: str, echo_ref: str) -> list[WireObservation]:
    """Not-specialized probe, then echo round trips."""
    return [
        _observe("invoke-before-specialize", endpoint, "/", {"probe": True}),
        _specialize("specialize-echo", endpoint, echo_ref),
        _observe("echo-params", endpoint, "/", {"alpha": 1, "text": "two words"}),
        _observe("echo-empty", endpoint, "/", {}),
    ]


def counter_session(endpoint: str, counter_ref: str) -> list[WireObservation]:
    """Warm-state counting: three invokes on one host must count 1, 2, 3."""
    return [
        _specialize("specialize-counter", endpoint, counter_ref),
        _observe("counter-1", endpoint, "/", {}),
        _observe("counter-2", endpoint, "/", {}),
        _observe("counter-3", endpoint, "/", {}),
    ]


def error_session(endpoint: str, error_ref: str) -> list[WireObservation]:
    """Handler exceptions must surface as 500 with '<Type>: <message>'."""
    return [
        _specialize("specialize-error", endpoint, error_ref),
        _observe("error-message", endpoint, "/", {"message": "boom"}),
        _observe("error-default", endpoint, "/", {}),
    ]


SESSIONS = (
    ("echo", echo_session),
    ("counter", counter_session),
    ("error", error_session),
)


def run_suite(make_endpoint, refs: dict[str, str]) -> list[WireObservation]:
    """Run every session, each against a fresh host.

    make_endpoint is a context manager factory yielding "host:port" for a
    newly started, unspecialized host. refs maps session name ("echo",
    "counter", "error") to the host's spelling of that handler's code_ref.
    """
    observations: list[WireObservation] = []
    for name, session in SESSIONS:
        with make_endpoint() as endpoint:
            observations.extend(session(endpoint, refs[name]))
    return observations
