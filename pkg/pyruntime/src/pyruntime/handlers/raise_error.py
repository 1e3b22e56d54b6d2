"""Failing handler: raises with a caller-chosen message, for error-path tests."""

from __future__ import annotations


def main(params: dict, ctx):
    raise RuntimeError(str(params.get("message", "boom")))
