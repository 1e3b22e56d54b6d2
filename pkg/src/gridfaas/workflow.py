"""Linear workflow chains over catalog functions.

A workflow file names an ordered list of steps; each step invokes one
function and its parameters may splice in earlier results through three
placeholder forms:

  ${input.<key>}          a value from the run's input mapping
  ${prev.output}          the previous step's output
  ${steps.<name>.output}  a named earlier step's output

The grammar is exactly that. Anything else inside ${...}, or a reference
to a step that has not run yet, is rejected when the file is parsed.

Steps run strictly in order and every step goes through the normal dispatch
pipeline, so the planner sees intermediate outputs as replicas on the node
that produced them and later steps follow the data.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import Catalog
from .errors import IoError, NotFound, StepFailed, ValidationError
from .gateway import Dispatcher
from .invocation import InvocationRequest, InvocationResult

PLACEHOLDER_RE = re.compile(r"\$\{([^}]*)\}")

STATUS_COMPLETED = "completed"
STATUS_ABORTED = "aborted"


@dataclass
class WorkflowStep:
    step_name: str
    function_name: str
    parameters: dict


@dataclass
class WorkflowSpec:
    name: str
    steps: tuple[WorkflowStep, ...]


@dataclass
class StepRecord:
    step_name: str
    function_name: str
    node_id: str
    result: InvocationResult


@dataclass
class WorkflowResult:
    workflow_name: str
    records: list[StepRecord] = field(default_factory=list)
    aborted_at: str | None = None

    @property
    def status(self) -> str:
        if self.aborted_at is None:
            return STATUS_COMPLETED
        return f"aborted_at({self.aborted_at})"

    @property
    def final_output(self):
        if self.aborted_at is not None or not self.records:
            return None
        return self.records[-1].result.output


# --- parsing ------------------------------------------------------------------


def _check_placeholders(value, step_name: str, prior: list[str], first: bool) -> None:
    """Walk a parameter value and reject any placeholder outside the grammar."""
    if isinstance(value, str):
        for expr in PLACEHOLDER_RE.findall(value):
            if expr == "prev.output":
                if first:
                    raise ValidationError(
                        f"step {step_name!r}: ${{prev.output}} has no previous step"
                    )
            elif expr.startswith("input.") and len(expr) > len("input."):
                pass  # key presence is checked against the run's inputs
            elif expr.startswith("steps.") and expr.endswith(".output"):
                name = expr[len("steps."):-len(".output")]
                if not name:
                    raise ValidationError(f"step {step_name!r}: bad placeholder ${{{expr}}}")
                if name not in prior:
                    raise ValidationError(
                        f"step {step_name!r}: ${{{expr}}} does not reference a prior step"
                    )
            else:
                raise ValidationError(f"step {step_name!r}: bad placeholder ${{{expr}}}")
    elif isinstance(value, dict):
        for v in value.values():
            _check_placeholders(v, step_name, prior, first)
    elif isinstance(value, list):
        for v in value:
            _check_placeholders(v, step_name, prior, first)


def parse_workflow(path: Path | str, catalog: Catalog | None = None) -> WorkflowSpec:
    """Read and validate a workflow file.

    With a catalog, every referenced function must exist. Placeholder
    grammar and step ordering are always checked.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read workflow file {path}: {exc}") from None
    except ValueError as exc:
        raise IoError(f"workflow file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("workflow document must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise ValidationError("workflow needs a non-empty string 'name'")
    raw_steps = doc.get("steps")
    if not isinstance(raw_steps, list):
        raise ValidationError("workflow 'steps' must be a list")

    steps: list[WorkflowStep] = []
    seen: list[str] = []
    for i, raw in enumerate(raw_steps):
        if not isinstance(raw, dict):
            raise ValidationError(f"step #{i + 1} must be a JSON object")
        step_name = raw.get("step_name")
        if not isinstance(step_name, str) or not step_name:
            raise ValidationError(f"step #{i + 1} needs a non-empty 'step_name'")
        if step_name in seen:
            raise ValidationError(f"duplicate step name {step_name!r}")
        function_name = raw.get("function_name")
        if not isinstance(function_name, str) or not function_name:
            raise ValidationError(f"step {step_name!r} needs a 'function_name'")
        parameters = raw.get("parameters", {})
        if not isinstance(parameters, dict):
            raise ValidationError(f"step {step_name!r}: 'parameters' must be an object")
        if catalog is not None:
            try:
                catalog.get_function(function_name)
            except NotFound:
                raise ValidationError(
                    f"step {step_name!r} references unknown function {function_name!r}"
                ) from None
        _check_placeholders(parameters, step_name, seen, first=(i == 0))
        steps.append(WorkflowStep(step_name, function_name, parameters))
        seen.append(step_name)
    return WorkflowSpec(name=name, steps=tuple(steps))


# --- execution ----------------------------------------------------------------


def _collect_input_keys(value, keys: set[str]) -> None:
    if isinstance(value, str):
        for expr in PLACEHOLDER_RE.findall(value):
            if expr.startswith("input."):
                keys.add(expr[len("input."):])
    elif isinstance(value, dict):
        for v in value.values():
            _collect_input_keys(v, keys)
    elif isinstance(value, list):
        for v in value:
            _collect_input_keys(v, keys)


def _substitute(value, resolve):
    if isinstance(value, str):
        return PLACEHOLDER_RE.sub(lambda m: resolve(m.group(1)), value)
    if isinstance(value, dict):
        return {k: _substitute(v, resolve) for k, v in value.items()}
    if isinstance(value, list):
        return [_substitute(v, resolve) for v in value]
    return value


def run_workflow(
    spec: WorkflowSpec, inputs: dict, dispatcher: Dispatcher
) -> WorkflowResult:
    """Execute the chain in order. Raises StepFailed on the first non-ok step."""
    needed: set[str] = set()
    for step in spec.steps:
        _collect_input_keys(step.parameters, needed)
        try:
            dispatcher.catalog.get_function(step.function_name)
        except NotFound:
            raise ValidationError(
                f"step {step.step_name!r} references unknown function "
                f"{step.function_name!r}"
            ) from None
    missing = sorted(needed - set(inputs))
    if missing:
        raise ValidationError(f"missing workflow inputs: {', '.join(missing)}")
    for key in sorted(needed):
        if not isinstance(inputs[key], str):
            raise ValidationError(f"workflow input {key!r} must be a string")

    result = WorkflowResult(workflow_name=spec.name)
    outputs: dict[str, str] = {}  # step_name -> text output
    prev_output: str | None = None

    for step in spec.steps:
        def resolve(expr: str, _prev=prev_output) -> str:
            if expr == "prev.output":
                if _prev is None:
                    raise StepFailed(
                        f"step {step.step_name!r}: previous step produced no "
                        "text output to chain",
                        result=result,
                    )
                return _prev
            if expr.startswith("input."):
                return inputs[expr[len("input."):]]
            name = expr[len("steps."):-len(".output")]
            if name not in outputs:
                raise StepFailed(
                    f"step {step.step_name!r}: step {name!r} produced no text "
                    "output to chain",
                    result=result,
                )
            return outputs[name]

        params = _substitute(step.parameters, resolve)
        request = InvocationRequest(function_name=step.function_name, parameters=params)
        invocation = dispatcher.dispatch(request)
        if not invocation.ok:
            result.aborted_at = step.step_name
            raise StepFailed(
                f"workflow {spec.name!r} aborted at step {step.step_name!r}: "
                f"{invocation.output_text()}",
                result=result,
                invocation=invocation,
            )
        result.records.append(
            StepRecord(step.step_name, step.function_name, invocation.node_id, invocation)
        )
        if isinstance(invocation.output, str):
            outputs[step.step_name] = invocation.output
            prev_output = invocation.output
        else:
            prev_output = None
    return result
