"""Wrapper handler that shells out to the wsclean executable.

Parameters: {"Input-MS": <grid>, "args": "<cli options>"}. The command is
assembled as the executable, then the whitespace-split option string, then
the input path last. The executable comes from the WSCLEAN_BIN environment
variable; the repository ships ``wsclean-stub`` to stand in for the real
imager. On success the handler returns ``/data/<stem>-image``, the output
the executable is expected to produce.
"""

from __future__ import annotations

import os
import subprocess

from pyruntime.datafiles import as_data_ref, resolve
from pyruntime.errors import ExecutableNotFound, MissingParameter, NonZeroExit


def main(params: dict, ctx):
    binary = os.environ.get("WSCLEAN_BIN", "")
    if not binary:
        raise ExecutableNotFound("WSCLEAN_BIN is not set")
    if "Input-MS" not in params:
        raise MissingParameter("Input-MS")
    input_name = str(params["Input-MS"])
    input_path = resolve(input_name, ctx.data_root)
    options = str(params.get("args", "")).split()
    command = [binary, *options, str(input_path)]
    try:
        completed = subprocess.run(command, cwd=ctx.data_root, capture_output=True)
    except (FileNotFoundError, PermissionError) as exc:
        raise ExecutableNotFound(f"cannot run {binary!r}: {exc}") from None
    if completed.returncode != 0:
        detail = completed.stderr.decode("utf-8", "replace").strip()
        raise NonZeroExit(
            f"{binary} exited with code {completed.returncode}"
            + (f": {detail}" if detail else ""))
    return as_data_ref(f"{input_path.stem}-image")
