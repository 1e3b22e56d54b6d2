"""Data-path convention shared by all file-touching handlers.

Request parameters may reference files as bare names ("obs1.ms") or as
gateway-style paths ("/data/obs1.ms"); both resolve under the host's data
root so chained outputs feed straight into the next invocation.
"""

from __future__ import annotations

from pathlib import Path

DATA_PREFIX = "/data/"


def resolve(value: str, data_root: Path | str) -> Path:
    name = value[len(DATA_PREFIX):] if value.startswith(DATA_PREFIX) else value
    return Path(data_root) / name


def as_data_ref(name: str) -> str:
    return DATA_PREFIX + name
