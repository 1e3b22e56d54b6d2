"""External Python runtime for the FaaS platform's specialize/invoke protocol.

A generic host process (``pyruntime-host``) is specialized at runtime with
one of the bundled handler modules — or any module exposing
``main(params, ctx)`` — and serves invocations over loopback HTTP. Grid
image I/O and the mock science transforms live in :mod:`pyruntime.gridio`.
"""

from __future__ import annotations

from .datafiles import as_data_ref, resolve
from .errors import ExecutableNotFound, MissingParameter, NonZeroExit
from .gridio import (
    DEFAULT_SIGMA,
    GRID_CONTENT_TYPE,
    GridImage,
    MalformedGrid,
    blur,
    calibrate,
    flag,
    format_grid,
    gaussian_kernel,
    parse_grid,
    read_grid,
    write_grid,
)
from .handlers import HANDLER_DIR, handler_path
from .host import (
    NOT_SPECIALIZED,
    REQUEST_ID_HEADER,
    TEXT_CONTENT_TYPE,
    HandlerHost,
    RequestContext,
    load_entry,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SIGMA",
    "GRID_CONTENT_TYPE",
    "GridImage",
    "HANDLER_DIR",
    "HandlerHost",
    "ExecutableNotFound",
    "MalformedGrid",
    "MissingParameter",
    "NOT_SPECIALIZED",
    "NonZeroExit",
    "REQUEST_ID_HEADER",
    "RequestContext",
    "TEXT_CONTENT_TYPE",
    "as_data_ref",
    "blur",
    "calibrate",
    "flag",
    "format_grid",
    "gaussian_kernel",
    "handler_path",
    "load_entry",
    "parse_grid",
    "read_grid",
    "resolve",
    "write_grid",
]
