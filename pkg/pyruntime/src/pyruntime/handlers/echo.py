"""Echo handler: returns the received parameters as JSON text."""

from __future__ import annotations

import json


def main(params: dict, ctx):
    return json.dumps(params)
