"""HTTP gateway and the dispatch pipeline behind it.

Every invocation, whether it arrives over HTTP, from the CLI, or from a
workflow step, runs the same pipeline:

  1. extract data references from the parameters,
  2. ask the planner where to run (bumps that node's in-flight load),
  3. acquire a runtime handle (warm reuse or cold spawn),
  4. forward the parameters over the wire protocol,
  5. release the handle, drop the load, and register the output file as a
     replica on the executing node so later steps plan toward it.

Status mapping at the HTTP edge: ok -> 200, handler_error -> 502,
platform_error -> 500, pool capacity -> 503, unknown route -> 404, wrong
method -> 405, non-object body -> 400.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .catalog import Catalog, FunctionSpec, snapshot_to_json
from .cluster import ClusterState, load_topology, single_node_cluster
from .errors import (
    CapacityExhausted,
    ExecutorError,
    NotFound,
    PlannerError,
    RouteConflict,
)
from .executor import Executor
from .invocation import (
    STATUS_HANDLER_ERROR,
    STATUS_OK,
    STATUS_PLATFORM_ERROR,
    TEXT_CONTENT_TYPE,
    InvocationRequest,
    InvocationResult,
    new_request_id,
)
from .planner import Weights, plan
from .runtimehost import REQUEST_ID_HEADER

log = logging.getLogger("gridfaas.gateway")

NODE_HEADER = "X-Faas-Node"
COLD_START_HEADER = "X-Faas-Cold-Start"
DURATION_HEADER = "X-Faas-Duration-Ms"

DATA_PREFIX = "/data/"

# parameter keys whose string values name data items
REF_KEY_SUFFIX = "-MS"
REF_KEY_NAMES = ("file",)


def extract_data_refs(parameters: dict) -> list[str]:
    """Pull data item ids out of the parameters, in document order.

    A parameter counts as a data reference when its key ends in "-MS" or is
    exactly "file" and its value is a non-empty string. A "/data/" prefix is
    the runtime-visible mount point, not part of the item id, so it is
    stripped.
    """
    refs: list[str] = []
    for key, value in parameters.items():
        if not (key.endswith(REF_KEY_SUFFIX) or key in REF_KEY_NAMES):
            continue
        if not isinstance(value, str):
            continue
        item = value[len(DATA_PREFIX):] if value.startswith(DATA_PREFIX) else value
        if item and item not in refs:
            refs.append(item)
    return refs


class Dispatcher:
    """Runs the plan/acquire/invoke/release pipeline for one platform."""

    def __init__(
        self,
        catalog: Catalog,
        cluster: ClusterState,
        executor: Executor,
        weights: Weights | None = None,
    ):
        self.catalog = catalog
        self.cluster = cluster
        self.executor = executor
        self.weights = weights if weights is not None else Weights()
        self.data_root = executor.data_root
        self.data_root.mkdir(parents=True, exist_ok=True)

    def dispatch(self, request: InvocationRequest) -> InvocationResult:
        """Run one invocation end to end.

        Raises NotFound for an unregistered function and CapacityExhausted
        when the pool stays full past the queue timeout; every other failure
        comes back as a platform_error / handler_error result.
        """
        fn = self.catalog.get_function(request.function_name)
        env = self.catalog.get_environment(fn.env_name)
        refs = request.data_refs or extract_data_refs(request.parameters)

        try:
            decision = plan(refs, self.cluster, self.weights)
        except PlannerError as exc:
            return InvocationResult(
                request_id=request.request_id,
                status=STATUS_PLATFORM_ERROR,
                output=f"placement failed: {exc}",
            )
        node_id = decision.node_id

        try:
            try:
                handle, cold = self.executor.acquire(fn, env)
            except CapacityExhausted:
                raise
            except ExecutorError as exc:
                return InvocationResult(
                    request_id=request.request_id,
                    status=STATUS_PLATFORM_ERROR,
                    output=str(exc),
                    node_id=node_id,
                )

            started = time.perf_counter()
            try:
                wire = self.executor.invoke(handle, request.parameters, request.request_id)
            except ExecutorError as exc:
                # invoke() already terminated and released the dead handle
                return InvocationResult(
                    request_id=request.request_id,
                    status=STATUS_PLATFORM_ERROR,
                    output=str(exc),
                    node_id=node_id,
                    cold_start=cold,
                )
            duration_ms = (time.perf_counter() - started) * 1000.0
            self.executor.release(handle)
        finally:
            self.cluster.update_load(node_id, -1)

        if wire.status == 200:
            result = InvocationResult(
                request_id=request.request_id,
                status=STATUS_OK,
                output=self._decode_output(wire.body, wire.content_type),
                content_type=wire.content_type or TEXT_CONTENT_TYPE,
                node_id=node_id,
                cold_start=cold,
                duration_ms=duration_ms,
            )
            self._register_output(result)
            return result
        return InvocationResult(
            request_id=request.request_id,
            status=STATUS_HANDLER_ERROR,
            output=wire.body.decode("utf-8", "replace"),
            node_id=node_id,
            cold_start=cold,
            duration_ms=duration_ms,
        )

    @staticmethod
    def _decode_output(body: bytes, content_type: str):
        if content_type.startswith("text/") or not content_type:
            return body.decode("utf-8", "replace")
        return body

    def _register_output(self, result: InvocationResult) -> None:
        """Outputs live where they were produced: record the replica there."""
        output = result.output
        if not isinstance(output, str) or not output.startswith(DATA_PREFIX):
            return
        data_id = output[len(DATA_PREFIX):]
        if not data_id:
            return
        path = self.data_root / data_id
        size = path.stat().st_size if path.exists() else 0
        self.cluster.add_replica(data_id, result.node_id, size)


@dataclass
class _Route:
    function: FunctionSpec


class GatewayServer:
    """Loopback HTTP server exposing functions at their registered routes."""

    def __init__(self, dispatcher: Dispatcher, host: str = "127.0.0.1", port: int = 8888):
        self.dispatcher = dispatcher
        self._routes: dict[str, FunctionSpec] = {}
        self._routes_version = -1
        self._routes_lock = threading.Lock()
        self._rebuild_routes()  # raises RouteConflict before the socket opens
        gateway = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):
                log.debug("gateway: " + fmt, *args)

            def _reply(self, status: int, body: bytes, content_type: str, headers: dict | None = None):
                self.send_response(status)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(body)))
                for name, value in (headers or {}).items():
                    self.send_header(name, value)
                self.end_headers()
                self.wfile.write(body)

            def _reply_text(self, status: int, text: str, headers: dict | None = None):
                self._reply(status, text.encode("utf-8"), TEXT_CONTENT_TYPE, headers)

            def do_GET(self):
                if self.path == "/healthz":
                    self._reply_text(200, "ok")
                    return
                if self.path == "/catalog":
                    doc = snapshot_to_json(gateway.dispatcher.catalog.snapshot())
                    body = json.dumps(doc, indent=2).encode("utf-8")
                    self._reply(200, body, "application/json")
                    return
                fn = gateway.resolve_route(self.path)
                if fn is None:
                    self._reply_text(404, f"no function at {self.path}")
                elif fn.http_method != "GET":
                    self._reply_text(405, f"{fn.name} accepts {fn.http_method} only")
                else:
                    self._run(fn, {})

            def do_POST(self):
                fn = gateway.resolve_route(self.path)
                if fn is None:
                    self._reply_text(404, f"no function at {self.path}")
                    return
                if fn.http_method != "POST":
                    self._reply_text(405, f"{fn.name} accepts {fn.http_method} only")
                    return
                length = int(self.headers.get("Content-Length") or 0)
                raw = self.rfile.read(length) if length else b""
                if raw:
                    try:
                        params = json.loads(raw.decode("utf-8"))
                    except (UnicodeDecodeError, ValueError):
                        self._reply_text(400, "request body is not valid JSON")
                        return
                    if not isinstance(params, dict):
                        self._reply_text(400, "request body must be a JSON object")
                        return
                else:
                    params = {}
                self._run(fn, params)

            def _run(self, fn: FunctionSpec, params: dict):
                request_id = self.headers.get(REQUEST_ID_HEADER) or new_request_id()
                request = InvocationRequest(
                    function_name=fn.name, parameters=params, request_id=request_id
                )
                try:
                    result = gateway.dispatcher.dispatch(request)
                except CapacityExhausted as exc:
                    self._reply_text(503, str(exc), {REQUEST_ID_HEADER: request_id})
                    return
                except NotFound as exc:
                    self._reply_text(404, str(exc), {REQUEST_ID_HEADER: request_id})
                    return
                headers = {
                    REQUEST_ID_HEADER: result.request_id,
                    NODE_HEADER: result.node_id,
                    COLD_START_HEADER: "true" if result.cold_start else "false",
                    DURATION_HEADER: f"{result.duration_ms:.3f}",
                }
                status = {
                    STATUS_OK: 200,
                    STATUS_HANDLER_ERROR: 502,
                    STATUS_PLATFORM_ERROR: 500,
                }[result.status]
                self._reply(status, result.output_bytes(), result.content_type, headers)

        class Server(ThreadingHTTPServer):
            daemon_threads = True
            # bursts of concurrent invocations overflow the default backlog of 5
            request_queue_size = 128

        self._server = Server((host, port), Handler)
        self._thread = threading.Thread(
            target=lambda: self._server.serve_forever(poll_interval=0.05),
            name="gateway",
            daemon=True,
        )

    # --- routing -------------------------------------------------------------

    def _rebuild_routes(self) -> None:
        routes: dict[str, FunctionSpec] = {}
        for fn in self.dispatcher.catalog.list_functions():
            if fn.url_route in routes:
                raise RouteConflict(
                    f"route {fn.url_route!r} claimed by both "
                    f"{routes[fn.url_route].name!r} and {fn.name!r}"
                )
            routes[fn.url_route] = fn
        self._routes = routes
        self._routes_version = self.dispatcher.catalog.version

    def resolve_route(self, path: str) -> FunctionSpec | None:
        with self._routes_lock:
            if self._routes_version != self.dispatcher.catalog.version:
                self._rebuild_routes()
            fn = self._routes.get(path)
            if fn is None and not path.endswith("/"):
                fn = self._routes.get(path + "/")
            return fn

    # --- lifecycle -------------------------------------------------------------

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._server.server_address[:2]
        return host, port

    @property
    def url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}"

    def serve_forever(self) -> None:
        """Run in the calling thread until interrupted (CLI serve path)."""
        try:
            self._server.serve_forever()
        finally:
            self._server.server_close()


def build_platform(
    catalog_path: str | Path,
    data_root: str | Path,
    topology_path: str | Path | None = None,
    queue_timeout: float = 10.0,
) -> Dispatcher:
    """Assemble catalog + cluster + executor into a ready Dispatcher."""
    catalog = Catalog.open(Path(catalog_path))
    if topology_path is not None:
        cluster = load_topology(Path(topology_path))
        weights = Weights.from_mapping(cluster.weights)
    else:
        cluster = single_node_cluster()
        weights = Weights()
    executor = Executor(Path(data_root), queue_timeout=queue_timeout)
    return Dispatcher(catalog, cluster, executor, weights)
