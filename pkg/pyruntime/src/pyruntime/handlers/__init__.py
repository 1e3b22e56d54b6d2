"""Handler modules served by the runtime host.

Each file here is a standalone handler: the platform specializes a host
with the file's path and the host calls its ``main(params, ctx)``. The
helper below turns a handler name into the path the catalog should store
as the function's code reference.
"""

from __future__ import annotations

from pathlib import Path

HANDLER_DIR = Path(__file__).resolve().parent


def handler_path(name: str) -> str:
    """Absolute path of a bundled handler module, e.g. handler_path("echo")."""
    path = HANDLER_DIR / f"{name}.py"
    if not path.is_file():
        known = sorted(p.stem for p in HANDLER_DIR.glob("*.py") if p.stem != "__init__")
        raise KeyError(f"no bundled handler {name!r}; known: {', '.join(known)}")
    return str(path)
