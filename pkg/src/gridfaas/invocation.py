"""Request/result records for one HTTP-triggered function execution."""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone

STATUS_OK = "ok"
STATUS_HANDLER_ERROR = "handler_error"
STATUS_PLATFORM_ERROR = "platform_error"

TEXT_CONTENT_TYPE = "text/plain; charset=utf-8"


def new_request_id() -> str:
    return uuid.uuid4().hex


@dataclass
class InvocationRequest:
    function_name: str
    parameters: dict
    data_refs: list[str] = field(default_factory=list)
    request_id: str = field(default_factory=new_request_id)
    received_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))


@dataclass
class InvocationResult:
    request_id: str
    status: str  # ok | handler_error | platform_error
    output: str | bytes | None = None    # payload, or the error text for non-ok
    content_type: str = TEXT_CONTENT_TYPE
    node_id: str = ""
    cold_start: bool = False
    duration_ms: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    def output_text(self) -> str:
        if isinstance(self.output, bytes):
            return self.output.decode("utf-8", errors="replace")
        return self.output or ""

    def output_bytes(self) -> bytes:
        if isinstance(self.output, bytes):
            return self.output
        return (self.output or "").encode("utf-8")
