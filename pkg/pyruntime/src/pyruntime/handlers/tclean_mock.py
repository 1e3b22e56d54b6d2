"""Imaging-task handler shaped like a CASA tclean call.

Parameters: {"Input-MS": <grid>, "Output-MS": <name>, ...}. Extra keys are
accepted and ignored, mirroring a task invocation that forwards arbitrary
keyword arguments. Blurring stands in for deconvolution/cleaning; the
handler writes the result to Output-MS and returns its /data/ path.
"""

from __future__ import annotations

from pyruntime.datafiles import as_data_ref, resolve
from pyruntime.errors import MissingParameter
from pyruntime.gridio import blur, read_grid, write_grid


def main(params: dict, ctx):
    for key in ("Input-MS", "Output-MS"):
        if key not in params:
            raise MissingParameter(key)
    input_name = str(params["Input-MS"])
    output_name = str(params["Output-MS"])
    image = read_grid(resolve(input_name, ctx.data_root))
    write_grid(resolve(output_name, ctx.data_root), blur(image))
    return as_data_ref(output_name)
