"""Command-line surface for the platform.

Verb grammar follows the shape of the FaaS CLIs the platform mimics:

  gridfaas env create --name python-casa-6.5 --image dockerhub/casa
  gridfaas fn create --name tclean --env python-casa-6.5 --code mock-tclean \
      --method POST --url "/tclean/"
  gridfaas serve --listen 127.0.0.1:8888
  gridfaas fn invoke --name tclean --data @parameters-tclean.json
  gridfaas topology load topology.json
  gridfaas data add --id obs2.ms --size 1073741824 --nodes gra-01,jbo-01
  gridfaas plan explain --fn tclean --data '{"Input-MS": "obs1.ms"}'
  gridfaas workflow run pipeline.json --input ms=obs1.ms

Exit codes: 0 success, 1 domain/validation error, 2 I/O or environment
error. Errors are one line on standard error, prefixed "error:". With
--output json every command prints exactly one JSON document on success.
"""

from __future__ import annotations

import argparse
import http.client
import json
import os
import shlex
import sys
import urllib.parse
from dataclasses import dataclass
from pathlib import Path

from .catalog import (
    Catalog,
    EnvironmentSpec,
    FunctionSpec,
    _env_to_json,
    _fn_to_json,
)
from .cluster import load_topology, single_node_cluster
from .errors import FaasError, IoError, NotFound, SchemaMismatch, StepFailed
from .executor import Executor
from .gateway import (
    Dispatcher,
    GatewayServer,
    extract_data_refs,
)
from .invocation import new_request_id
from .planner import Weights, estimate_cost
from .runtimehost import REQUEST_ID_HEADER
from .workflow import parse_workflow, run_workflow

DEFAULT_GATEWAY_URL = "http://127.0.0.1:8888"
DEFAULT_LISTEN = "127.0.0.1:8888"

OUTPUT_TEXT = "text"
OUTPUT_JSON = "json"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so we own the exit codes."""

    def error(self, message):
        raise _UsageError(message)


@dataclass
class CliConfig:
    catalog: Path
    topology: Path | None
    data_root: Path
    listen: str
    output: str

    @classmethod
    def from_args(cls, args) -> CliConfig:
        return cls(
            catalog=Path(args.catalog).resolve(),
            topology=Path(args.topology).resolve() if args.topology else None,
            data_root=Path(args.data_root).resolve(),
            listen=args.listen,
            output=args.output,
        )


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--catalog", default="./catalog.json", help="catalog file path")
    common.add_argument("--topology", default=None, help="cluster topology file path")
    common.add_argument("--data-root", default="./data", help="shared data directory")
    common.add_argument("--listen", default=DEFAULT_LISTEN, help="gateway bind address")
    common.add_argument(
        "--output", choices=(OUTPUT_TEXT, OUTPUT_JSON), default=OUTPUT_TEXT,
        help="output format",
    )
    return common


def build_parser() -> _Parser:
    common = _common_options()
    parser = _Parser(prog="gridfaas", description="FaaS platform for science pipelines")
    sub = parser.add_subparsers(dest="verb", required=True)

    env = sub.add_parser("env", help="manage environments")
    env_sub = env.add_subparsers(dest="action", required=True)
    env_create = env_sub.add_parser("create", parents=[common])
    env_create.add_argument("--name", required=True)
    env_create.add_argument("--image", required=True)
    env_create.add_argument("--kind", default="builtin-test",
                            choices=("builtin-test", "external-process"))
    env_create.add_argument("--command", default="",
                            help="launch command template for external-process")
    env_sub.add_parser("list", parents=[common])
    env_delete = env_sub.add_parser("delete", parents=[common])
    env_delete.add_argument("--name", required=True)

    fn = sub.add_parser("fn", help="manage and invoke functions")
    fn_sub = fn.add_subparsers(dest="action", required=True)
    fn_create = fn_sub.add_parser("create", parents=[common])
    fn_create.add_argument("--name", required=True)
    fn_create.add_argument("--env", required=True)
    fn_create.add_argument("--code", required=True)
    fn_create.add_argument("--method", default="POST", choices=("GET", "POST"))
    fn_create.add_argument("--url", default="")
    fn_create.add_argument("--min-warm", type=int, default=0)
    fn_create.add_argument("--max-pool", type=int, default=4)
    fn_create.add_argument("--idle-timeout", type=float, default=60.0)
    fn_sub.add_parser("list", parents=[common])
    fn_delete = fn_sub.add_parser("delete", parents=[common])
    fn_delete.add_argument("--name", required=True)
    fn_invoke = fn_sub.add_parser("invoke", parents=[common])
    fn_invoke.add_argument("--name", required=True)
    fn_invoke.add_argument("--data", default="{}",
                           help="JSON parameters, or @file to read them from a file")

    serve = sub.add_parser("serve", parents=[common], help="run the gateway")
    serve.add_argument("--queue-timeout", type=float, default=10.0)

    topo = sub.add_parser("topology", help="inspect topology files")
    topo_sub = topo.add_subparsers(dest="action", required=True)
    topo_load = topo_sub.add_parser("load", parents=[common])
    topo_load.add_argument("file")

    data = sub.add_parser("data", help="manage data item records")
    data_sub = data.add_subparsers(dest="action", required=True)
    data_add = data_sub.add_parser("add", parents=[common])
    data_add.add_argument("--id", required=True, dest="data_id")
    data_add.add_argument("--size", required=True, type=int, help="size in bytes")
    data_add.add_argument("--nodes", required=True, help="comma-separated replica nodes")

    plan_p = sub.add_parser("plan", help="inspect placement decisions")
    plan_sub = plan_p.add_subparsers(dest="action", required=True)
    plan_explain = plan_sub.add_parser("explain", parents=[common])
    plan_explain.add_argument("--fn", required=True, dest="fn_name")
    plan_explain.add_argument("--data", default="{}",
                              help="JSON parameters, or @file")

    wf = sub.add_parser("workflow", help="run workflows")
    wf_sub = wf.add_subparsers(dest="action", required=True)
    wf_run = wf_sub.add_parser("run", parents=[common])
    wf_run.add_argument("file")
    wf_run.add_argument("--input", action="append", default=[], metavar="KEY=VALUE")

    return parser


# --- helpers -------------------------------------------------------------------


def _emit(cfg: CliConfig, doc, lines: list[str]) -> None:
    if cfg.output == OUTPUT_JSON:
        print(json.dumps(doc, indent=2))
    else:
        for line in lines:
            print(line)


def _load_data_arg(raw: str) -> dict:
    """Parse --data (inline JSON or @file) into a parameters object."""
    if raw.startswith("@"):
        path = Path(raw[1:])
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from None
    try:
        params = json.loads(raw)
    except ValueError as exc:
        raise ValueError(f"--data is not valid JSON: {exc}") from None
    if not isinstance(params, dict):
        raise ValueError("--data must be a JSON object")
    return params


def _gateway_url() -> str:
    return os.environ.get("FAAS_GATEWAY_URL", DEFAULT_GATEWAY_URL).rstrip("/")


def _table(rows: list[list[str]], header: list[str]) -> list[str]:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header).rstrip()]
    for row in rows:
        lines.append(fmt.format(*row).rstrip())
    return lines


def _build_cluster(cfg: CliConfig):
    if cfg.topology is not None:
        cluster = load_topology(cfg.topology)
        return cluster, Weights.from_mapping(cluster.weights)
    return single_node_cluster(), Weights()


# --- verb implementations --------------------------------------------------------


def _cmd_env(cfg: CliConfig, args) -> int:
    catalog = Catalog.open(cfg.catalog)
    if args.action == "create":
        launch = tuple(shlex.split(args.command)) if args.command else ()
        spec = catalog.create_environment(EnvironmentSpec(
            name=args.name,
            image_ref=args.image,
            runtime_kind=args.kind,
            launch_command=launch,
        ))
        _emit(cfg, _env_to_json(spec), [spec.name])
    elif args.action == "list":
        envs = catalog.list_environments()
        rows = [[e.name, e.image_ref, e.runtime_kind] for e in envs]
        _emit(cfg, [_env_to_json(e) for e in envs],
              _table(rows, ["NAME", "IMAGE", "KIND"]) if rows else ["(no environments)"])
    else:
        catalog.delete_environment(args.name)
        _emit(cfg, {"deleted": args.name}, [f"deleted {args.name}"])
    return 0


def _cmd_fn(cfg: CliConfig, args) -> int:
    if args.action == "invoke":
        return _cmd_fn_invoke(cfg, args)
    catalog = Catalog.open(cfg.catalog)
    if args.action == "create":
        code = args.code
        if Path(code).exists():
            code = str(Path(code).resolve())
        spec = catalog.create_function(FunctionSpec(
            name=args.name,
            env_name=args.env,
            code_ref=code,
            http_method=args.method,
            url_route=args.url or f"/{args.name}/",
            min_warm=args.min_warm,
            max_pool=args.max_pool,
            idle_timeout=args.idle_timeout,
        ))
        _emit(cfg, _fn_to_json(spec), [spec.name])
    elif args.action == "list":
        fns = catalog.list_functions()
        rows = [[f.name, f.env_name, f.url_route, f.http_method] for f in fns]
        _emit(cfg, [_fn_to_json(f) for f in fns],
              _table(rows, ["NAME", "ENV", "ROUTE", "METHOD"]) if rows else ["(no functions)"])
    else:
        catalog.delete_function(args.name)
        _emit(cfg, {"deleted": args.name}, [f"deleted {args.name}"])
    return 0


def _cmd_fn_invoke(cfg: CliConfig, args) -> int:
    params = _load_data_arg(args.data)  # validates before any network traffic
    route = f"/{args.name}/"
    if cfg.catalog.exists():
        try:
            route = Catalog.load(cfg.catalog).get_function(args.name).url_route
        except (NotFound, FaasError):
            pass  # let the gateway answer 404 for unknown functions
    url = urllib.parse.urlsplit(_gateway_url())
    conn = http.client.HTTPConnection(url.hostname, url.port or 80, timeout=300.0)
    request_id = new_request_id()
    try:
        conn.request(
            "POST",
            route,
            body=json.dumps(params).encode("utf-8"),
            headers={"Content-Type": "application/json",
                     REQUEST_ID_HEADER: request_id},
        )
        resp = conn.getresponse()
        body = resp.read()
        status = resp.status
        headers = {
            "node": resp.getheader("X-Faas-Node"),
            "cold_start": resp.getheader("X-Faas-Cold-Start"),
            "duration_ms": resp.getheader("X-Faas-Duration-Ms"),
            "request_id": resp.getheader(REQUEST_ID_HEADER),
        }
    except OSError as exc:
        raise IoError(f"cannot reach gateway at {_gateway_url()}: {exc}") from None
    finally:
        conn.close()
    text = body.decode("utf-8", "replace")
    if status == 200:
        _emit(cfg, {"status_code": status, "body": text, **headers}, [text])
        return 0
    print(f"error: HTTP {status}: {text}", file=sys.stderr)
    return 1


def _cmd_serve(cfg: CliConfig, args) -> int:
    host, _, port_str = cfg.listen.rpartition(":")
    if not host or not port_str.isdigit():
        raise ValueError(f"--listen must be host:port, got {cfg.listen!r}")
    catalog = Catalog.open(cfg.catalog)
    cluster, weights = _build_cluster(cfg)
    executor = Executor(cfg.data_root, queue_timeout=args.queue_timeout)
    dispatcher = Dispatcher(catalog, cluster, executor, weights)
    gateway = GatewayServer(dispatcher, host=host, port=int(port_str))
    for fn in catalog.list_functions():
        if fn.min_warm > 0:
            executor.prewarm(fn, catalog.get_environment(fn.env_name))
    executor.start_reaper()
    print(f"gateway listening on {gateway.url}", file=sys.stderr)
    try:
        gateway.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        executor.shutdown()
    return 0


def _cmd_topology(cfg: CliConfig, args) -> int:
    cluster = load_topology(args.file)
    doc = {
        "nodes": [n.node_id for n in cluster.sorted_nodes()],
        "links": len(cluster.links),
        "data_items": sorted(cluster.data_items),
        "weights": dict(cluster.weights),
    }
    _emit(cfg, doc, [
        f"nodes: {', '.join(doc['nodes'])}",
        f"links: {doc['links']}",
        f"data items: {', '.join(doc['data_items']) or '(none)'}",
    ])
    return 0


def _cmd_data(cfg: CliConfig, args) -> int:
    if cfg.topology is None:
        raise ValueError("data add needs --topology pointing at a topology file")
    try:
        doc = json.loads(cfg.topology.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read {cfg.topology}: {exc}") from None
    except ValueError as exc:
        raise IoError(f"{cfg.topology} is not valid JSON: {exc}") from None
    nodes = [n.strip() for n in args.nodes.split(",") if n.strip()]
    if not nodes:
        raise ValueError("--nodes must name at least one node")
    known = {n.get("node_id") for n in doc.get("nodes", [])}
    for node in nodes:
        if node not in known:
            raise ValueError(f"unknown node {node!r} in topology")
    if args.size < 0:
        raise ValueError("--size must be >= 0 bytes")
    items = [i for i in doc.get("data_items", []) if i.get("data_id") != args.data_id]
    items.append({"data_id": args.data_id, "size_bytes": args.size,
                  "replica_nodes": nodes})
    doc["data_items"] = items
    cfg.topology.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    load_topology(cfg.topology)  # round-trip validation
    _emit(cfg, {"data_id": args.data_id, "size_bytes": args.size, "replica_nodes": nodes},
          [f"{args.data_id}: {args.size} bytes on {', '.join(nodes)}"])
    return 0


def _cmd_plan(cfg: CliConfig, args) -> int:
    params = _load_data_arg(args.data)
    catalog = Catalog.open(cfg.catalog)
    catalog.get_function(args.fn_name)  # placement is per-invocation, fn must exist
    cluster, weights = _build_cluster(cfg)
    refs = extract_data_refs(params)
    rows = []
    doc_rows = []
    best = None
    for node in cluster.sorted_nodes():
        try:
            breakdown, transfers = estimate_cost(node, refs, cluster, weights)
        except FaasError as exc:
            rows.append([node.node_id, "-", "-", "-", "-", f"infeasible: {exc}"])
            doc_rows.append({"node_id": node.node_id, "feasible": False,
                             "reason": str(exc)})
            continue
        total = breakdown.total
        if best is None or total < best[0]:
            best = (total, node.node_id)
        rows.append([
            node.node_id,
            f"{breakdown.transfer_cost:.6f}",
            f"{breakdown.latency_cost:.6f}",
            f"{breakdown.compute_cost:.6f}",
            f"{total:.6f}",
            "",
        ])
        doc_rows.append({
            "node_id": node.node_id,
            "feasible": True,
            "transfer_cost": breakdown.transfer_cost,
            "latency_cost": breakdown.latency_cost,
            "compute_cost": breakdown.compute_cost,
            "total_cost": total,
            "transfers": [
                {"data_id": t.data_id, "source_node": t.source_node, "bytes": t.bytes}
                for t in transfers
            ],
        })
    if best is not None:
        for row in rows:
            if row[0] == best[1] and row[5] == "":
                row[5] = "<- chosen"
                break
    lines = _table(rows, ["NODE", "TRANSFER", "LATENCY", "COMPUTE", "TOTAL", ""])
    _emit(cfg, {"function": args.fn_name, "data_refs": refs, "nodes": doc_rows,
                "chosen": best[1] if best else None}, lines)
    return 0


def _cmd_workflow(cfg: CliConfig, args) -> int:
    inputs = {}
    for pair in args.input:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ValueError(f"--input must be KEY=VALUE, got {pair!r}")
        inputs[key] = value
    catalog = Catalog.open(cfg.catalog)
    spec = parse_workflow(args.file, catalog)
    cluster, weights = _build_cluster(cfg)
    executor = Executor(cfg.data_root)
    dispatcher = Dispatcher(catalog, cluster, executor, weights)
    try:
        result = run_workflow(spec, inputs, dispatcher)
    finally:
        executor.shutdown()
    lines = []
    doc_steps = []
    for record in result.records:
        r = record.result
        out = r.output if isinstance(r.output, str) else f"<{len(r.output)} bytes>"
        lines.append(
            f"step {record.step_name}: {record.function_name} on {record.node_id} "
            f"({r.duration_ms:.1f} ms) -> {out}"
        )
        doc_steps.append({
            "step_name": record.step_name,
            "function_name": record.function_name,
            "node_id": record.node_id,
            "duration_ms": r.duration_ms,
            "output": out,
        })
    final = result.final_output
    final_text = final if isinstance(final, str) else None
    lines.append(f"workflow {result.workflow_name}: {result.status}")
    if final_text is not None:
        lines.append(final_text)
    _emit(cfg, {"workflow": result.workflow_name, "status": result.status,
                "steps": doc_steps, "final_output": final_text}, lines)
    return 0


# --- entry point ---------------------------------------------------------------


def _run(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = CliConfig.from_args(args)
    verb = args.verb
    if verb == "env":
        return _cmd_env(cfg, args)
    if verb == "fn":
        return _cmd_fn(cfg, args)
    if verb == "serve":
        return _cmd_serve(cfg, args)
    if verb == "topology":
        return _cmd_topology(cfg, args)
    if verb == "data":
        return _cmd_data(cfg, args)
    if verb == "plan":
        return _cmd_plan(cfg, args)
    if verb == "workflow":
        return _cmd_workflow(cfg, args)
    raise _UsageError(f"unknown verb {verb!r}")


def main(argv=None) -> int:
    try:
        return _run(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StepFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IoError, SchemaMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FaasError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
