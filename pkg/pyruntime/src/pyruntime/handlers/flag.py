"""Flagging handler: zeroes pixels whose magnitude exceeds a threshold.

Parameters: {"Input-MS": <grid>, "threshold": <number>}. Writes
``<stem>-flagged`` under the data root and returns its /data/ path.
"""

from __future__ import annotations

from pathlib import Path

from pyruntime.datafiles import as_data_ref, resolve
from pyruntime.errors import MissingParameter
from pyruntime.gridio import flag, read_grid, write_grid


def main(params: dict, ctx):
    if "Input-MS" not in params:
        raise MissingParameter("Input-MS")
    name = str(params["Input-MS"])
    threshold = float(params.get("threshold", float("inf")))
    image = read_grid(resolve(name, ctx.data_root))
    out_name = f"{Path(name).stem}-flagged"
    write_grid(ctx.data_root / out_name, flag(image, threshold))
    return as_data_ref(out_name)
