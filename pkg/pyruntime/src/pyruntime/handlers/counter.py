"""Counter handler: module state makes warm reuse and recycling observable.

The count lives in this module, so it survives invocations on the same
host process and vanishes when the platform recycles the runtime.
"""

from __future__ import annotations

_count = 0


def main(params: dict, ctx):
    global _count
    _count += 1
    return str(_count)
