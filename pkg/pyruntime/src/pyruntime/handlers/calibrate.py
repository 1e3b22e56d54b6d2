"""Calibration handler: applies a multiplicative gain to every pixel.

Parameters: {"Input-MS": <grid>, "gain": <number>}. Writes ``<stem>-cal``
under the data root and returns its /data/ path.
"""

from __future__ import annotations

from pathlib import Path

from pyruntime.datafiles import as_data_ref, resolve
from pyruntime.errors import MissingParameter
from pyruntime.gridio import calibrate, read_grid, write_grid


def main(params: dict, ctx):
    if "Input-MS" not in params:
        raise MissingParameter("Input-MS")
    name = str(params["Input-MS"])
    gain = float(params.get("gain", 1.0))
    image = read_grid(resolve(name, ctx.data_root))
    out_name = f"{Path(name).stem}-cal"
    write_grid(ctx.data_root / out_name, calibrate(image, gain))
    return as_data_ref(out_name)
