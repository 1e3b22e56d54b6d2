"""In-process runtime host for the builtin-test environment.

Speaks the exact wire protocol external runtime hosts speak, over a real
loopback HTTP socket, so the executor cannot tell the two apart:

  POST /specialize  {"code_path": "<handler>", "entry": "main"}
                    -> 200 "specialized" | 500 <error text>
  POST /            <parameters JSON>
                    -> 200 <output> | 500 <error text>
  GET  /healthz     -> 200 "ok"

The X-Faas-Request-Id header echoes through on every response. Handler
errors are formatted as "<ExceptionType>: <message>".
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .handlers import REGISTRY, RuntimeContext
from .invocation import TEXT_CONTENT_TYPE

log = logging.getLogger("gridfaas.runtimehost")

REQUEST_ID_HEADER = "X-Faas-Request-Id"

NOT_SPECIALIZED = "not specialized"


class BuiltinRuntimeHost:
    """One host instance == one simulated container; state dies with it."""

    def __init__(self, data_root: Path | str, handlers: dict | None = None):
        self._handlers = handlers if handlers is not None else REGISTRY
        self._ctx = RuntimeContext(Path(data_root))
        self._handler_fn = None
        self._invoke_lock = threading.Lock()
        host = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):
                log.debug("builtin host: " + fmt, *args)

            def _reply(self, status: int, body: bytes, content_type: str):
                self.send_response(status)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(body)))
                request_id = self.headers.get(REQUEST_ID_HEADER)
                if request_id:
                    self.send_header(REQUEST_ID_HEADER, request_id)
                self.end_headers()
                self.wfile.write(body)

            def _reply_text(self, status: int, text: str):
                self._reply(status, text.encode("utf-8"), TEXT_CONTENT_TYPE)

            def _read_body(self) -> bytes:
                length = int(self.headers.get("Content-Length") or 0)
                return self.rfile.read(length) if length else b""

            def do_GET(self):
                if self.path == "/healthz":
                    self._reply_text(200, "ok")
                else:
                    self._reply_text(404, "not found")

            def do_POST(self):
                body = self._read_body()
                if self.path == "/specialize":
                    self._reply_text(*host._specialize(body))
                elif self.path == "/":
                    status, payload, content_type = host._invoke(body)
                    self._reply(status, payload, content_type)
                else:
                    self._reply_text(404, "not found")

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._server.daemon_threads = True
        self._thread = threading.Thread(
            # short poll interval keeps stop() fast
            target=lambda: self._server.serve_forever(poll_interval=0.05),
            name="builtin-runtime-host",
            daemon=True,
        )

    # --- lifecycle -------------------------------------------------------

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    @property
    def endpoint(self) -> str:
        host, port = self._server.server_address[:2]
        return f"{host}:{port}"

    def is_alive(self) -> bool:
        return self._thread.is_alive()

    # --- protocol --------------------------------------------------------

    def _specialize(self, body: bytes) -> tuple[int, str]:
        try:
            doc = json.loads(body.decode("utf-8") or "{}")
            code_path = doc["code_path"]
        except (ValueError, KeyError):
            return 500, "invalid specialize request"
        fn = self._handlers.get(code_path)
        if fn is None:
            return 500, f"unknown handler: {code_path}"
        self._handler_fn = fn
        return 200, "specialized"

    def _invoke(self, body: bytes) -> tuple[int, bytes, str]:
        if self._handler_fn is None:
            return 500, NOT_SPECIALIZED.encode("utf-8"), TEXT_CONTENT_TYPE
        try:
            params = json.loads(body.decode("utf-8")) if body else {}
        except ValueError:
            return 500, b"invalid parameters JSON", TEXT_CONTENT_TYPE
        if not isinstance(params, dict):
            return 500, b"invalid parameters JSON", TEXT_CONTENT_TYPE
        try:
            with self._invoke_lock:
                output = self._handler_fn(params, self._ctx)
        except Exception as exc:
            text = f"{type(exc).__name__}: {exc}"
            return 500, text.encode("utf-8"), TEXT_CONTENT_TYPE
        if isinstance(output, tuple):
            payload, content_type = output
            return 200, bytes(payload), str(content_type)
        return 200, str(output).encode("utf-8"), TEXT_CONTENT_TYPE
