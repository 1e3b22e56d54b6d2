"""Runtime pools and the wire client.

One Executor owns one pool per function. A pool hands out runtime handles:
warm ones are reused most-recently-released first, cold ones are spawned and
specialized on demand up to max_pool, and callers past that queue until a
handle frees up or queue_timeout expires. An idle handle that sits unused
longer than the function's idle_timeout is reaped down to the min_warm floor.

Two runtime kinds hide behind the same handle: builtin-test hosts run
in-process on a loopback port, external-process hosts are spawned from the
environment's launch_command. Both speak the identical specialize/invoke
protocol, so everything above the transport is shared.

Timing uses an injectable clock (time.monotonic by default) so idle reaping
is testable without sleeping; the queue wait and spawn readiness poll stay
on real time because they block real threads.
"""

from __future__ import annotations

import http.client
import itertools
import json
import logging
import os
import socket
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import EnvironmentSpec, FunctionSpec
from .errors import CapacityExhausted, InvokeTimeout, RuntimeCrashed, SpawnFailure
from .runtimehost import REQUEST_ID_HEADER, BuiltinRuntimeHost

log = logging.getLogger("gridfaas.executor")

STATE_STARTING = "starting"
STATE_IDLE = "idle"
STATE_BUSY = "busy"
STATE_TERMINATED = "terminated"

SPAWN_TIMEOUT_S = 15.0
SPAWN_POLL_S = 0.02
DEFAULT_QUEUE_TIMEOUT_S = 10.0
DEFAULT_INVOKE_TIMEOUT_S = 300.0
DEFAULT_REAP_PERIOD_S = 1.0

_handle_seq = itertools.count(1)


@dataclass
class RuntimeHandle:
    """A live, specialized runtime host bound to one function."""

    handle_id: str
    function_name: str
    env_name: str
    endpoint: str  # "host:port"
    state: str = STATE_STARTING
    last_used_at: float = 0.0
    invocation_count: int = 0
    # exactly one of these is set, depending on the runtime kind
    builtin_host: BuiltinRuntimeHost | None = None
    process: subprocess.Popen | None = None

    def terminate(self) -> None:
        if self.state == STATE_TERMINATED:
            return
        self.state = STATE_TERMINATED
        if self.builtin_host is not None:
            self.builtin_host.stop()
        if self.process is not None:
            self.process.terminate()
            try:
                self.process.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self.process.kill()
                self.process.wait()


@dataclass
class WireResponse:
    """What the runtime host answered, verbatim."""

    status: int
    body: bytes
    content_type: str
    request_id: str | None


@dataclass
class _Pool:
    idle: list[RuntimeHandle] = field(default_factory=list)
    total: int = 0  # busy + idle + reserved-for-spawn
    high_water: int = 0


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_for_listen(host: str, port: int, deadline: float) -> bool:
    while time.monotonic() < deadline:
        try:
            with socket.create_connection((host, port), timeout=0.25):
                return True
        except OSError:
            time.sleep(SPAWN_POLL_S)
    return False


class Executor:
    """Spawns, pools, and talks to runtime hosts."""

    def __init__(
        self,
        data_root: Path | str,
        queue_timeout: float = DEFAULT_QUEUE_TIMEOUT_S,
        invoke_timeout: float = DEFAULT_INVOKE_TIMEOUT_S,
        clock=time.monotonic,
    ):
        self.data_root = Path(data_root)
        self.data_root.mkdir(parents=True, exist_ok=True)
        self.queue_timeout = queue_timeout
        self.invoke_timeout = invoke_timeout
        self.clock = clock
        self._pools: dict[str, _Pool] = {}
        self._cond = threading.Condition()
        self._closed = False
        self._reaper: threading.Thread | None = None
        self._reaper_stop = threading.Event()
        # function_name -> (FunctionSpec, EnvironmentSpec), for reap/prewarm
        self._known: dict[str, tuple[FunctionSpec, EnvironmentSpec]] = {}

    # --- pool front door ---------------------------------------------------

    def acquire(self, fn: FunctionSpec, env: EnvironmentSpec) -> tuple[RuntimeHandle, bool]:
        """Return (handle, cold_start). Blocks up to queue_timeout at capacity."""
        with self._cond:
            self._known[fn.name] = (fn, env)
            pool = self._pools.setdefault(fn.name, _Pool())
            deadline = time.monotonic() + self.queue_timeout
            while True:
                if self._closed:
                    raise RuntimeError("executor is shut down")
                if pool.idle:
                    handle = pool.idle.pop()  # LIFO: most recently warm
                    handle.state = STATE_BUSY
                    return handle, False
                if pool.total < fn.max_pool:
                    pool.total += 1  # reserve the slot before dropping the lock
                    pool.high_water = max(pool.high_water, pool.total)
                    break
                remaining = deadline - time.monotonic()
                if remaining <= 0 or not self._cond.wait(timeout=remaining):
                    raise CapacityExhausted(
                        f"function {fn.name!r}: all {fn.max_pool} runtimes busy "
                        f"for {self.queue_timeout:.1f}s"
                    )
        try:
            handle = self._spawn(fn, env)
        except BaseException:
            with self._cond:
                pool.total -= 1
                self._cond.notify_all()
            raise
        handle.state = STATE_BUSY
        return handle, True

    def release(self, handle: RuntimeHandle) -> None:
        """Hand a handle back to its pool (or burn its slot if it died)."""
        with self._cond:
            pool = self._pools.get(handle.function_name)
            if pool is None:
                handle.terminate()
                return
            if handle.state == STATE_TERMINATED:
                pool.total -= 1
            else:
                handle.state = STATE_IDLE
                handle.last_used_at = self.clock()
                pool.idle.append(handle)
            self._cond.notify_all()

    def discard(self, handle: RuntimeHandle) -> None:
        """Terminate a handle and free its slot (crash / timeout path)."""
        handle.terminate()
        self.release(handle)

    # --- wire client ---------------------------------------------------------

    def invoke(
        self,
        handle: RuntimeHandle,
        parameters: dict,
        request_id: str,
        timeout: float | None = None,
    ) -> WireResponse:
        """POST the parameters to the handle. Crashes and timeouts terminate it."""
        body = json.dumps(parameters).encode("utf-8")
        try:
            resp = self._post(
                handle.endpoint,
                "/",
                body,
                request_id=request_id,
                timeout=timeout if timeout is not None else self.invoke_timeout,
            )
        except socket.timeout:
            self.discard(handle)
            raise InvokeTimeout(
                f"runtime for {handle.function_name!r} did not answer in time"
            ) from None
        except OSError as exc:
            self.discard(handle)
            raise RuntimeCrashed(
                f"runtime for {handle.function_name!r} dropped the connection: {exc}"
            ) from None
        handle.invocation_count += 1
        return resp

    def _post(
        self,
        endpoint: str,
        path: str,
        body: bytes,
        request_id: str | None = None,
        timeout: float = DEFAULT_INVOKE_TIMEOUT_S,
    ) -> WireResponse:
        host, port = endpoint.rsplit(":", 1)
        conn = http.client.HTTPConnection(host, int(port), timeout=timeout)
        try:
            headers = {"Content-Type": "application/json"}
            if request_id:
                headers[REQUEST_ID_HEADER] = request_id
            conn.request("POST", path, body=body, headers=headers)
            resp = conn.getresponse()
            payload = resp.read()
            return WireResponse(
                status=resp.status,
                body=payload,
                content_type=resp.getheader("Content-Type") or "",
                request_id=resp.getheader(REQUEST_ID_HEADER),
            )
        finally:
            conn.close()

    # --- spawning ------------------------------------------------------------

    def _spawn(self, fn: FunctionSpec, env: EnvironmentSpec) -> RuntimeHandle:
        handle_id = f"{fn.name}-{next(_handle_seq)}"
        if env.runtime_kind == "builtin-test":
            host = BuiltinRuntimeHost(self.data_root)
            host.start()
            handle = RuntimeHandle(
                handle_id=handle_id,
                function_name=fn.name,
                env_name=env.name,
                endpoint=host.endpoint,
                builtin_host=host,
            )
        else:
            handle = self._spawn_external(handle_id, fn, env)
        try:
            self._specialize(handle, fn.code_ref)
        except BaseException:
            handle.terminate()
            raise
        handle.last_used_at = self.clock()
        return handle

    def _spawn_external(
        self, handle_id: str, fn: FunctionSpec, env: EnvironmentSpec
    ) -> RuntimeHandle:
        port = _free_port()
        cmd = [
            arg.replace("{port}", str(port)).replace("{workdir}", str(self.data_root))
            for arg in env.launch_command
        ]
        child_env = dict(os.environ)
        child_env["FAAS_RUNTIME_PORT"] = str(port)
        try:
            proc = subprocess.Popen(
                cmd,
                cwd=self.data_root,
                env=child_env,
                stdout=subprocess.DEVNULL,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise SpawnFailure(f"could not launch {cmd[0]!r}: {exc}") from None
        deadline = time.monotonic() + SPAWN_TIMEOUT_S
        if not _wait_for_listen("127.0.0.1", port, deadline):
            proc.terminate()
            proc.wait()
            raise SpawnFailure(
                f"runtime for env {env.name!r} never listened on port {port}"
            )
        return RuntimeHandle(
            handle_id=handle_id,
            function_name=fn.name,
            env_name=env.name,
            endpoint=f"127.0.0.1:{port}",
            process=proc,
        )

    def _specialize(self, handle: RuntimeHandle, code_ref: str) -> None:
        body = json.dumps({"code_path": code_ref, "entry": "main"}).encode("utf-8")
        try:
            resp = self._post(handle.endpoint, "/specialize", body, timeout=SPAWN_TIMEOUT_S)
        except OSError as exc:
            raise SpawnFailure(f"specialize failed: {exc}") from None
        if resp.status != 200:
            raise SpawnFailure(
                f"specialize rejected: {resp.body.decode('utf-8', 'replace')}"
            )

    # --- maintenance -----------------------------------------------------------

    def reap_idle(self, now: float | None = None) -> int:
        """Terminate idle handles past idle_timeout, keeping min_warm per pool."""
        if now is None:
            now = self.clock()
        doomed: list[RuntimeHandle] = []
        with self._cond:
            for name, pool in self._pools.items():
                known = self._known.get(name)
                if known is None:
                    continue
                fn = known[0]
                # idle list is append-ordered by last_used_at, so the expired
                # handles form a prefix
                kill = [h for h in pool.idle if now - h.last_used_at > fn.idle_timeout]
                keep = [h for h in pool.idle if now - h.last_used_at <= fn.idle_timeout]
                shortfall = fn.min_warm - len(keep)
                if shortfall > 0 and kill:
                    spared = kill[-shortfall:]  # youngest expired fill the floor
                    kill = kill[: len(kill) - len(spared)]
                    keep = spared + keep
                pool.idle = keep
                pool.total -= len(kill)
                doomed.extend(kill)
            if doomed:
                self._cond.notify_all()
        for handle in doomed:
            handle.terminate()
        return len(doomed)

    def prewarm(self, fn: FunctionSpec, env: EnvironmentSpec) -> int:
        """Top the pool up to min_warm idle handles. Returns handles created."""
        created = 0
        while True:
            with self._cond:
                self._known[fn.name] = (fn, env)
                pool = self._pools.setdefault(fn.name, _Pool())
                if len(pool.idle) >= fn.min_warm or pool.total >= fn.max_pool:
                    return created
                pool.total += 1
                pool.high_water = max(pool.high_water, pool.total)
            try:
                handle = self._spawn(fn, env)
            except BaseException:
                with self._cond:
                    pool.total -= 1
                    self._cond.notify_all()
                raise
            handle.state = STATE_IDLE
            with self._cond:
                pool.idle.append(handle)
                self._cond.notify_all()
            created += 1

    def start_reaper(self, period: float = DEFAULT_REAP_PERIOD_S) -> None:
        if self._reaper is not None:
            return
        self._reaper_stop.clear()

        def run():
            while not self._reaper_stop.wait(period):
                try:
                    self.reap_idle()
                except Exception:
                    log.exception("idle reaper pass failed")

        self._reaper = threading.Thread(target=run, name="pool-reaper", daemon=True)
        self._reaper.start()

    def stop_reaper(self) -> None:
        if self._reaper is None:
            return
        self._reaper_stop.set()
        self._reaper.join(timeout=5.0)
        self._reaper = None

    def pool_stats(self, function_name: str) -> dict:
        with self._cond:
            pool = self._pools.get(function_name, _Pool())
            return {
                "total": pool.total,
                "idle": len(pool.idle),
                "busy": pool.total - len(pool.idle),
                "high_water": pool.high_water,
            }

    def shutdown(self) -> None:
        self.stop_reaper()
        with self._cond:
            self._closed = True
            doomed = []
            for pool in self._pools.values():
                doomed.extend(pool.idle)
                pool.idle.clear()
                pool.total = 0
            self._cond.notify_all()
        for handle in doomed:
            handle.terminate()
