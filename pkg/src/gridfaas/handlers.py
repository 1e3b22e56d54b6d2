"""Native handlers served by the builtin-test runtime.

Each handler takes the parsed request parameters and a RuntimeContext and
returns either text (str) or a binary payload as (bytes, content_type).
Raising maps to a handler error on the wire. The mock science handlers read
and write grid files under the data root and mirror the external runtime's
handlers exactly, so pipeline outputs are comparable across both runtimes.

Data-path convention: parameter values may be bare names ("obs1.ms") or
"/data/"-prefixed paths; both resolve under the data root.
"""

from __future__ import annotations

import json
import shutil
import time
from pathlib import Path

from . import gridimage
from .gridimage import read_grid, write_grid


class MissingParameter(Exception):
    pass


class RuntimeContext:
    """Per-host-instance context: shared data root plus scratch state.

    The state dict lives as long as the host instance, which is what lets
    the counter handler observe warm reuse and lose its count on recycle.
    """

    def __init__(self, data_root: Path):
        self.data_root = Path(data_root)
        self.state: dict = {}


def resolve_data_path(value: str, data_root: Path) -> Path:
    name = value[len("/data/"):] if value.startswith("/data/") else value
    return Path(data_root) / name


def _require(params: dict, key: str) -> str:
    if key not in params:
        raise MissingParameter(key)
    return str(params[key])


def _stem(name: str) -> str:
    return Path(name).stem


def echo(params: dict, ctx: RuntimeContext):
    return json.dumps(params)


def sleep_ms(params: dict, ctx: RuntimeContext):
    ms = float(params.get("ms", 0))
    time.sleep(ms / 1000.0)
    return f"slept {params.get('ms', 0)}"


def counter(params: dict, ctx: RuntimeContext):
    ctx.state["count"] = ctx.state.get("count", 0) + 1
    return str(ctx.state["count"])


def raise_error(params: dict, ctx: RuntimeContext):
    raise RuntimeError(str(params.get("message", "boom")))


def mock_flag(params: dict, ctx: RuntimeContext):
    input_name = _require(params, "Input-MS")
    threshold = float(params.get("threshold", float("inf")))
    img = read_grid(resolve_data_path(input_name, ctx.data_root))
    out_name = f"{_stem(input_name)}-flagged"
    write_grid(ctx.data_root / out_name, gridimage.flag(img, threshold))
    return "/data/" + out_name


def mock_calibrate(params: dict, ctx: RuntimeContext):
    input_name = _require(params, "Input-MS")
    gain = float(params.get("gain", 1.0))
    img = read_grid(resolve_data_path(input_name, ctx.data_root))
    out_name = f"{_stem(input_name)}-cal"
    write_grid(ctx.data_root / out_name, gridimage.calibrate(img, gain))
    return "/data/" + out_name


def mock_tclean(params: dict, ctx: RuntimeContext):
    input_name = _require(params, "Input-MS")
    output_name = _require(params, "Output-MS")
    img = read_grid(resolve_data_path(input_name, ctx.data_root))
    write_grid(resolve_data_path(output_name, ctx.data_root), gridimage.blur(img))
    return "/data/" + output_name


def mock_wsclean(params: dict, ctx: RuntimeContext):
    input_name = _require(params, "Input-MS")
    out_name = f"{_stem(input_name)}-image"
    src = resolve_data_path(input_name, ctx.data_root)
    dst = ctx.data_root / out_name
    if src.exists():
        shutil.copyfile(src, dst)
    else:
        dst.write_bytes(b"")  # marker only; imaging itself is out of scope
    return "/data/" + out_name


REGISTRY = {
    "echo": echo,
    "sleep-ms": sleep_ms,
    "counter": counter,
    "raise-error": raise_error,
    "mock-flag": mock_flag,
    "mock-calibrate": mock_calibrate,
    "mock-tclean": mock_tclean,
    "mock-wsclean": mock_wsclean,
}
