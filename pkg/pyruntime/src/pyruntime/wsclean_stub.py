"""Stand-in for the wsclean imaging executable, used by tests and demos.

Contract: invoked as ``wsclean-stub [options...] <input>``, it copies the
input file to ``<stem>-image`` in the same directory and exits 0. Two
environment variables bend the behavior for failure-path testing:

  WSCLEAN_STUB_EXIT  force this exit code (skips the copy when non-zero)
  WSCLEAN_STUB_ARGV  write the received argv as JSON to this file
"""

from __future__ import annotations

import json
import os
import shutil
import sys
from pathlib import Path


def main(argv=None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    record = os.environ.get("WSCLEAN_STUB_ARGV")
    if record:
        Path(record).write_text(json.dumps([sys.argv[0], *args]), encoding="utf-8")
    forced = int(os.environ.get("WSCLEAN_STUB_EXIT", "0"))
    if forced != 0:
        print(f"wsclean-stub: forced failure exit {forced}", file=sys.stderr)
        return forced
    if not args:
        print("wsclean-stub: no input path given", file=sys.stderr)
        return 2
    source = Path(args[-1])
    if not source.is_file():
        print(f"wsclean-stub: input {source} not found", file=sys.stderr)
        return 2
    target = source.parent / f"{source.stem}-image"
    shutil.copyfile(source, target)
    return 0


if __name__ == "__main__":
    sys.exit(main())
