"""Gaussian blur handler: smooths a grid image and returns it inline.

Parameters: {"file": <grid under the data root>}. Writes the blurred grid
beside the input with a ``-blur`` suffix and returns the blurred payload
itself with the grid content type.
"""

from __future__ import annotations

from pyruntime.datafiles import resolve
from pyruntime.errors import MissingParameter
from pyruntime.gridio import GRID_CONTENT_TYPE, blur, format_grid, read_grid


def main(params: dict, ctx):
    if "file" not in params:
        raise MissingParameter("file")
    source = resolve(str(params["file"]), ctx.data_root)
    blurred = blur(read_grid(source))
    text = format_grid(blurred)
    target = source.parent / f"{source.stem}-blur"
    target.write_text(text, encoding="utf-8")
    return text.encode("utf-8"), GRID_CONTENT_TYPE
