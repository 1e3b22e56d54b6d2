"""Shared test fixtures: throwaway platforms wired to the builtin runtime."""

from __future__ import annotations

from pathlib import Path

import pytest

from gridfaas import (
    Catalog,
    Dispatcher,
    EnvironmentSpec,
    Executor,
    FunctionSpec,
    GatewayServer,
    single_node_cluster,
)
from suitehelp import ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{label}: {outcome}")


BUILTIN_ENV = "py-test"

# name -> (code_ref, extra FunctionSpec fields)
DEFAULT_FUNCTIONS = {
    "echo": ("echo", {}),
    "sleep-ms": ("sleep-ms", {}),
    "counter": ("counter", {}),
    "boom": ("raise-error", {}),
    "flag": ("mock-flag", {}),
    "calibrate": ("mock-calibrate", {}),
    "tclean": ("mock-tclean", {}),
    "wsclean": ("mock-wsclean", {}),
}


class PlatformFactory:
    """Builds catalog+executor+dispatcher(+gateway) stacks and tears them down."""

    def __init__(self, tmp_path: Path):
        self.tmp_path = tmp_path
        self._executors: list[Executor] = []
        self._gateways: list[GatewayServer] = []
        self._count = 0

    def catalog(self, functions=("echo",), overrides: dict | None = None) -> Catalog:
        catalog = Catalog()
        catalog.create_environment(
            EnvironmentSpec(name=BUILTIN_ENV, image_ref="local/builtin")
        )
        overrides = overrides or {}
        for name in functions:
            code_ref, extra = DEFAULT_FUNCTIONS[name]
            fields = {
                "name": name,
                "env_name": BUILTIN_ENV,
                "code_ref": code_ref,
                "url_route": f"/{name}/",
                **extra,
                **overrides.get(name, {}),
            }
            catalog.create_function(FunctionSpec(**fields))
        return catalog

    def dispatcher(
        self,
        functions=("echo",),
        overrides: dict | None = None,
        cluster=None,
        queue_timeout: float = 10.0,
        clock=None,
    ) -> Dispatcher:
        self._count += 1
        data_root = self.tmp_path / f"data{self._count}"
        kwargs = {"queue_timeout": queue_timeout}
        if clock is not None:
            kwargs["clock"] = clock
        executor = Executor(data_root, **kwargs)
        self._executors.append(executor)
        return Dispatcher(
            self.catalog(functions, overrides),
            cluster if cluster is not None else single_node_cluster(),
            executor,
        )

    def gateway(self, dispatcher: Dispatcher) -> GatewayServer:
        gw = GatewayServer(dispatcher, port=0)
        gw.start()
        self._gateways.append(gw)
        return gw

    def close(self) -> None:
        for gw in self._gateways:
            gw.stop()
        for ex in self._executors:
            ex.shutdown()


@pytest.fixture
def platforms(tmp_path):
    factory = PlatformFactory(tmp_path)
    yield factory
    factory.close()
