"""Helpers for driving runtime-host subprocesses over the wire in tests."""

from __future__ import annotations

import json
import os
import socket
import subprocess
import sys
import time
from contextlib import contextmanager
from http.client import HTTPConnection
from pathlib import Path

REQUEST_ID_HEADER = "X-Faas-Request-Id"
TEST_REQUEST_ID = "wiretest-0001"


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def wait_for_port(port: int, deadline_s: float = 10.0) -> None:
    deadline = time.monotonic() + deadline_s
    while time.monotonic() < deadline:
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                return
        except OSError:
            time.sleep(0.02)
    raise AssertionError(f"runtime host never listened on port {port}")


@contextmanager
def spawn_host(workdir: Path, env: dict[str, str] | None = None,
               use_env_port: bool = False):
    """Start a fresh host subprocess; yield its "host:port" endpoint."""
    port = free_port()
    child_env = dict(os.environ)
    if env:
        child_env.update(env)
    argv = [sys.executable, "-m", "pyruntime.host", "--workdir", str(workdir)]
    if use_env_port:
        child_env["FAAS_RUNTIME_PORT"] = str(port)
    else:
        argv += ["--port", str(port)]
    proc = subprocess.Popen(argv, env=child_env,
                            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        wait_for_port(port)
        yield f"127.0.0.1:{port}"
    finally:
        proc.terminate()
        proc.wait(timeout=5)


def post(endpoint: str, path: str, doc, raw: bytes | None = None,
         request_id: str | None = TEST_REQUEST_ID):
    """POST JSON (or raw bytes) and return (status, body, content_type, echoed_id)."""
    host, port = endpoint.rsplit(":", 1)
    headers = {"Content-Type": "application/json"}
    if request_id is not None:
        headers[REQUEST_ID_HEADER] = request_id
    conn = HTTPConnection(host, int(port), timeout=10.0)
    try:
        body = raw if raw is not None else json.dumps(doc).encode("utf-8")
        conn.request("POST", path, body=body, headers=headers)
        resp = conn.getresponse()
        return (resp.status, resp.read(), resp.getheader("Content-Type"),
                resp.getheader(REQUEST_ID_HEADER))
    finally:
        conn.close()


def get(endpoint: str, path: str):
    host, port = endpoint.rsplit(":", 1)
    conn = HTTPConnection(host, int(port), timeout=10.0)
    try:
        conn.request("GET", path)
        resp = conn.getresponse()
        return resp.status, resp.read()
    finally:
        conn.close()


def specialize(endpoint: str, code_path: str, entry: str = "main"):
    return post(endpoint, "/specialize", {"code_path": code_path, "entry": entry})


def invoke(endpoint: str, params: dict):
    return post(endpoint, "/", params)
