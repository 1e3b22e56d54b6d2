"""Generic Python runtime host: one process, one handler, one wire protocol.

The host starts empty. The platform specializes it by POSTing the path of a
handler module; the host loads the module, resolves its entry function
(``main`` unless told otherwise), and from then on every ``POST /`` runs
that function with the parsed JSON parameters. The protocol is fixed:

  POST /specialize  {"code_path": "<file.py>", "entry": "main"}
                    -> 200 "specialized" | 500 <load error text>
  POST /            <parameters JSON>
                    -> 200 <output> | 500 <error text>
  GET  /healthz     -> 200 "ok"

A handler error travels as ``<ExceptionType>: <message>``; invoking an
unspecialized host yields ``not specialized``; an unreadable parameters
body yields ``invalid parameters JSON``. The X-Faas-Request-Id header is
echoed back whenever the caller sends one. The server is single-threaded:
the platform enforces one in-flight invocation per runtime, so the host
itself stays simple.
"""

from __future__ import annotations

import argparse
import importlib.util
import json
import logging
import os
import sys
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

log = logging.getLogger("pyruntime.host")

REQUEST_ID_HEADER = "X-Faas-Request-Id"
TEXT_CONTENT_TYPE = "text/plain; charset=utf-8"
NOT_SPECIALIZED = "not specialized"

_module_serial = 0


class RequestContext:
    """What a handler gets to see besides its parameters.

    data_root is the working directory all relative file references resolve
    under; state is scratch storage that lives exactly as long as this host
    process, which is how warm reuse becomes observable to handlers.
    """

    def __init__(self, data_root: Path | str):
        self.data_root = Path(data_root)
        self.state: dict = {}


def load_entry(code_path: str, entry: str):
    """Import a handler module from a file path and return its entry callable."""
    global _module_serial
    path = Path(code_path)
    source_ok = path.is_file()
    if not source_ok:
        raise FileNotFoundError(f"handler module {code_path!r} does not exist")
    _module_serial += 1
    spec = importlib.util.spec_from_file_location(
        f"faas_handler_{_module_serial}", path)
    if spec is None or spec.loader is None:
        raise ImportError(f"cannot load handler module from {code_path!r}")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    fn = getattr(module, entry, None)
    if not callable(fn):
        raise AttributeError(f"handler entry {entry!r} is missing or not callable")
    return fn


class HandlerHost:
    """HTTP server wrapping one specialized handler function."""

    def __init__(self, port: int, workdir: Path | str):
        self._ctx = RequestContext(workdir)
        self._entry_fn = None
        self._loaded_key: tuple[str, str] | None = None
        outer = self

        class Protocol(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):
                log.debug("host: " + fmt, *args)

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

            def _body(self) -> bytes:
                length = int(self.headers.get("Content-Length") or 0)
                return self.rfile.read(length) if length else b""

            def do_GET(self):
                if self.path == "/healthz":
                    self._reply_text(200, "ok")
                else:
                    self._reply_text(404, "not found")

            def do_POST(self):
                body = self._body()
                if self.path == "/specialize":
                    self._reply_text(*outer.specialize(body))
                elif self.path == "/":
                    self._reply(*outer.invoke(body))
                else:
                    self._reply_text(404, "not found")

        self._server = HTTPServer(("127.0.0.1", port), Protocol)

    # --- protocol operations ---------------------------------------------

    def specialize(self, body: bytes) -> tuple[int, str]:
        try:
            doc = json.loads(body.decode("utf-8") or "{}")
            code_path = str(doc["code_path"])
        except (ValueError, KeyError, TypeError):
            return 500, "invalid specialize request"
        entry = str(doc.get("entry", "main"))
        key = (str(Path(code_path).resolve()), entry)
        if self._loaded_key == key:
            # idempotent: the module is already serving; reloading would
            # discard its state for no reason
            return 200, "specialized"
        try:
            fn = load_entry(code_path, entry)
        except Exception as exc:  # SyntaxError, ImportError, ... host survives
            return 500, f"{type(exc).__name__}: {exc}"
        self._entry_fn = fn
        self._loaded_key = key
        return 200, "specialized"

    def invoke(self, body: bytes) -> tuple[int, bytes, str]:
        if self._entry_fn is None:
            return 500, NOT_SPECIALIZED.encode("utf-8"), TEXT_CONTENT_TYPE
        try:
            params = json.loads(body.decode("utf-8")) if body else {}
        except ValueError:
            return 500, b"invalid parameters JSON", TEXT_CONTENT_TYPE
        if not isinstance(params, dict):
            return 500, b"invalid parameters JSON", TEXT_CONTENT_TYPE
        try:
            output = self._entry_fn(params, self._ctx)
        except Exception as exc:
            text = f"{type(exc).__name__}: {exc}"
            return 500, text.encode("utf-8"), TEXT_CONTENT_TYPE
        if isinstance(output, tuple):
            payload, content_type = output
            return 200, bytes(payload), str(content_type)
        return 200, str(output).encode("utf-8"), TEXT_CONTENT_TYPE

    # --- lifecycle ----------------------------------------------------------

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def serve_forever(self) -> None:
        self._server.serve_forever(poll_interval=0.05)

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pyruntime-host",
        description="runtime host speaking the FaaS specialize/invoke protocol",
    )
    parser.add_argument(
        "--port", type=int,
        default=int(os.environ.get("FAAS_RUNTIME_PORT", "8999")),
        help="TCP port to listen on (default: $FAAS_RUNTIME_PORT or 8999)",
    )
    parser.add_argument(
        "--workdir", default=".",
        help="data root that relative file parameters resolve under",
    )
    args = parser.parse_args(argv)
    host = HandlerHost(args.port, args.workdir)
    print(f"runtime host listening on 127.0.0.1:{host.port}", file=sys.stderr)
    try:
        host.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        host.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
