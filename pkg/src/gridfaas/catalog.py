"""Registry of environments and functions with durable JSON persistence.

The catalog is the source of truth the gateway routes from and the executor
spawns from. It is safe to share across concurrent request handlers: all
operations take the internal lock, and every mutation is persisted to the
bound path (write-to-temp-then-rename, so a crash never leaves a torn file).
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from .errors import (
    DuplicateName,
    DuplicateRoute,
    EnvironmentInUse,
    InvalidSpec,
    IoError,
    NotFound,
    SchemaMismatch,
    UnknownEnvironment,
)

SCHEMA_VERSION = 1

NAME_RE = re.compile(r"^[a-z0-9][a-z0-9.-]*$")

RUNTIME_KINDS = ("builtin-test", "external-process")

HTTP_METHODS = ("GET", "POST")


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class EnvironmentSpec:
    """A named runtime definition: how to obtain a host for functions."""

    name: str
    image_ref: str
    runtime_kind: str = "builtin-test"
    launch_command: tuple[str, ...] = ()
    created_at: datetime | None = None

    def validate(self) -> None:
        if not self.name:
            raise InvalidSpec("environment name must not be empty")
        if not NAME_RE.match(self.name):
            raise InvalidSpec(
                f"environment name {self.name!r} must match [a-z0-9][a-z0-9.-]*"
            )
        if self.runtime_kind not in RUNTIME_KINDS:
            raise InvalidSpec(
                f"runtime_kind {self.runtime_kind!r} must be one of {RUNTIME_KINDS}"
            )
        if self.runtime_kind == "external-process":
            if not self.launch_command:
                raise InvalidSpec("launch_command must not be empty for external-process")
            if not any("{port}" in part for part in self.launch_command):
                raise InvalidSpec("launch_command must contain the {port} placeholder")


@dataclass(frozen=True)
class FunctionSpec:
    """A named, routed, environment-bound function."""

    name: str
    env_name: str
    code_ref: str
    http_method: str = "POST"
    url_route: str = ""
    min_warm: int = 0
    max_pool: int = 4
    idle_timeout: float = 60.0
    created_at: datetime | None = None

    def validate(self) -> None:
        if not self.name:
            raise InvalidSpec("function name must not be empty")
        if not NAME_RE.match(self.name):
            raise InvalidSpec(f"function name {self.name!r} must match [a-z0-9][a-z0-9.-]*")
        if not self.env_name:
            raise InvalidSpec("env_name must not be empty")
        if not self.code_ref:
            raise InvalidSpec("code_ref must not be empty")
        if self.http_method not in HTTP_METHODS:
            raise InvalidSpec(f"http_method {self.http_method!r} must be one of {HTTP_METHODS}")
        if not (self.url_route.startswith("/") and self.url_route.endswith("/") and len(self.url_route) >= 2):
            raise InvalidSpec(
                f"url_route {self.url_route!r} must begin and end with '/', e.g. '/{self.name}/'"
            )
        if self.min_warm < 0:
            raise InvalidSpec("min_warm must be non-negative")
        if self.max_pool < 1:
            raise InvalidSpec("max_pool must be positive")
        if self.min_warm > self.max_pool:
            raise InvalidSpec(f"min_warm {self.min_warm} must be <= max_pool {self.max_pool}")
        if not (self.idle_timeout >= 0):
            raise InvalidSpec("idle_timeout must be non-negative")


@dataclass(frozen=True)
class CatalogSnapshot:
    environments: tuple[EnvironmentSpec, ...]
    functions: tuple[FunctionSpec, ...]
    schema_version: int = SCHEMA_VERSION


# --- JSON encoding ----------------------------------------------------------

def _env_to_json(env: EnvironmentSpec) -> dict:
    return {
        "name": env.name,
        "image_ref": env.image_ref,
        "runtime_kind": env.runtime_kind,
        "launch_command": list(env.launch_command),
        "created_at": env.created_at.isoformat() if env.created_at else None,
    }


def _env_from_json(obj: dict) -> EnvironmentSpec:
    return EnvironmentSpec(
        name=obj["name"],
        image_ref=obj["image_ref"],
        runtime_kind=obj["runtime_kind"],
        launch_command=tuple(obj.get("launch_command", ())),
        created_at=datetime.fromisoformat(obj["created_at"]) if obj.get("created_at") else None,
    )


def _fn_to_json(fn: FunctionSpec) -> dict:
    return {
        "name": fn.name,
        "env_name": fn.env_name,
        "code_ref": fn.code_ref,
        "http_method": fn.http_method,
        "url_route": fn.url_route,
        "min_warm": fn.min_warm,
        "max_pool": fn.max_pool,
        "idle_timeout": fn.idle_timeout,
        "created_at": fn.created_at.isoformat() if fn.created_at else None,
    }


def _fn_from_json(obj: dict) -> FunctionSpec:
    return FunctionSpec(
        name=obj["name"],
        env_name=obj["env_name"],
        code_ref=obj["code_ref"],
        http_method=obj["http_method"],
        url_route=obj["url_route"],
        min_warm=obj["min_warm"],
        max_pool=obj["max_pool"],
        idle_timeout=obj["idle_timeout"],
        created_at=datetime.fromisoformat(obj["created_at"]) if obj.get("created_at") else None,
    )


def snapshot_to_json(snap: CatalogSnapshot) -> dict:
    return {
        "schema_version": snap.schema_version,
        "environments": [_env_to_json(e) for e in snap.environments],
        "functions": [_fn_to_json(f) for f in snap.functions],
    }


def snapshot_from_json(doc: dict) -> CatalogSnapshot:
    if not isinstance(doc, dict):
        raise IoError("catalog document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaMismatch(f"unknown schema_version {version!r}, expected {SCHEMA_VERSION}")
    try:
        envs = tuple(_env_from_json(e) for e in doc.get("environments", []))
        fns = tuple(_fn_from_json(f) for f in doc.get("functions", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise IoError(f"malformed catalog document: {exc}") from exc
    return CatalogSnapshot(environments=envs, functions=fns, schema_version=version)


class Catalog:
    """In-memory registry, optionally bound to a JSON file for persistence.

    When ``path`` is set every successful mutation rewrites the file
    atomically. ``version`` increments on every mutation so the gateway can
    cheaply detect staleness and re-register routes.
    """

    def __init__(self, path: Path | str | None = None):
        self.path = Path(path) if path is not None else None
        self.version = 0
        self._lock = threading.RLock()
        self._environments: dict[str, EnvironmentSpec] = {}
        self._functions: dict[str, FunctionSpec] = {}

    # --- environments -------------------------------------------------

    def create_environment(self, spec: EnvironmentSpec) -> EnvironmentSpec:
        spec.validate()
        with self._lock:
            if spec.name in self._environments:
                raise DuplicateName(f"environment {spec.name!r} already exists")
            if spec.created_at is None:
                spec = replace(spec, created_at=_utcnow())
            self._environments[spec.name] = spec
            self._mutated()
            return spec

    def get_environment(self, name: str) -> EnvironmentSpec:
        with self._lock:
            try:
                return self._environments[name]
            except KeyError:
                raise NotFound(f"environment {name!r} not found") from None

    def list_environments(self) -> list[EnvironmentSpec]:
        with self._lock:
            return sorted(self._environments.values(), key=lambda e: e.name)

    def delete_environment(self, name: str) -> None:
        with self._lock:
            if name not in self._environments:
                raise NotFound(f"environment {name!r} not found")
            users = [f.name for f in self._functions.values() if f.env_name == name]
            if users:
                raise EnvironmentInUse(
                    f"environment {name!r} is referenced by function(s): {', '.join(sorted(users))}"
                )
            del self._environments[name]
            self._mutated()

    # --- functions ------------------------------------------------------

    def create_function(self, spec: FunctionSpec) -> FunctionSpec:
        spec.validate()
        with self._lock:
            if spec.env_name not in self._environments:
                raise UnknownEnvironment(f"environment {spec.env_name!r} does not exist")
            if spec.name in self._functions:
                raise DuplicateName(f"function {spec.name!r} already exists")
            for other in self._functions.values():
                if other.url_route == spec.url_route:
                    raise DuplicateRoute(
                        f"route {spec.url_route!r} is already taken by function {other.name!r}"
                    )
            if spec.created_at is None:
                spec = replace(spec, created_at=_utcnow())
            self._functions[spec.name] = spec
            self._mutated()
            return spec

    def get_function(self, name: str) -> FunctionSpec:
        with self._lock:
            try:
                return self._functions[name]
            except KeyError:
                raise NotFound(f"function {name!r} not found") from None

    def list_functions(self) -> list[FunctionSpec]:
        with self._lock:
            return sorted(self._functions.values(), key=lambda f: f.name)

    def delete_function(self, name: str) -> None:
        with self._lock:
            if name not in self._functions:
                raise NotFound(f"function {name!r} not found")
            del self._functions[name]
            self._mutated()

    # --- persistence ----------------------------------------------------

    def snapshot(self) -> CatalogSnapshot:
        with self._lock:
            return CatalogSnapshot(
                environments=tuple(self.list_environments()),
                functions=tuple(self.list_functions()),
            )

    def save_snapshot(self, path: Path | str | None = None) -> None:
        target = Path(path) if path is not None else self.path
        if target is None:
            return
        with self._lock:
            doc = snapshot_to_json(self.snapshot())
            _atomic_write_json(target, doc)

    @staticmethod
    def load_snapshot(path: Path | str) -> CatalogSnapshot:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read catalog {path}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IoError(
                f"corrupted catalog {path}: {exc.msg} at line {exc.lineno} column {exc.colno}"
            ) from exc
        return snapshot_from_json(doc)

    @classmethod
    def load(cls, path: Path | str) -> Catalog:
        """Build a catalog from a snapshot file, re-validating every record."""
        snap = cls.load_snapshot(path)
        catalog = cls(path=None)
        for env in snap.environments:
            catalog.create_environment(env)
        for fn in snap.functions:
            catalog.create_function(fn)
        catalog.path = Path(path)
        catalog.version = 0
        return catalog

    @classmethod
    def open(cls, path: Path | str) -> Catalog:
        """Load the catalog at ``path``, or start an empty one bound to it."""
        path = Path(path)
        if path.exists():
            return cls.load(path)
        return cls(path=path)

    def _mutated(self) -> None:
        self.version += 1
        if self.path is not None:
            self.save_snapshot(self.path)


def _atomic_write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
