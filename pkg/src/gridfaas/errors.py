"""Exception hierarchy for the platform.

Every domain error raised by the library derives from FaasError so callers
(CLI, gateway) can map errors to exit codes / HTTP statuses in one place.
IoError covers file-level failures and is deliberately distinct from the
domain errors: the CLI maps it to exit code 2 instead of 1.
"""

from __future__ import annotations


class FaasError(Exception):
    """Base class for all platform errors."""


class IoError(FaasError):
    """A file could not be read, parsed at the byte level, or written."""


# --- catalog ---------------------------------------------------------------

class CatalogError(FaasError):
    pass


class InvalidSpec(CatalogError):
    """A spec invariant is violated; the message names the failing field."""


class DuplicateName(CatalogError):
    pass


class DuplicateRoute(CatalogError):
    pass


class UnknownEnvironment(CatalogError):
    pass


class NotFound(CatalogError):
    pass


class EnvironmentInUse(CatalogError):
    pass


class SchemaMismatch(CatalogError):
    """Persisted document carries a schema_version this build does not know."""


# --- gateway ---------------------------------------------------------------

class RouteConflict(FaasError):
    """Two functions claim the same URL route; fatal at gateway startup."""


# --- executor --------------------------------------------------------------

class ExecutorError(FaasError):
    pass


class SpawnFailure(ExecutorError):
    """Runtime host failed to start or specialize within spawn_timeout."""


class CapacityExhausted(ExecutorError):
    """All max_pool handles stayed busy past the queue timeout."""


class RuntimeCrashed(ExecutorError):
    """The runtime host dropped the connection or exited mid-invocation."""


class InvokeTimeout(ExecutorError):
    """The runtime host did not answer within the invocation timeout."""


# --- planner ---------------------------------------------------------------

class PlannerError(FaasError):
    pass


class InvalidTopology(PlannerError):
    """Cluster state violates an invariant; the message names which one."""


class Infeasible(PlannerError):
    """A node cannot run the invocation (disconnected data or at capacity)."""


class NoFeasibleNode(PlannerError):
    pass


class LoadUnderflow(PlannerError):
    """A load decrement would have driven a node's in-flight count negative."""


# --- workflow --------------------------------------------------------------

class WorkflowError(FaasError):
    pass


class ValidationError(WorkflowError):
    """Workflow file is structurally invalid (bad placeholder, forward ref, ...)."""


class StepFailed(WorkflowError):
    """A workflow step's invocation did not return ok.

    Carries the aborted WorkflowResult (records of completed steps only)
    and the failing step's InvocationResult.
    """

    def __init__(self, message: str, result=None, invocation=None):
        super().__init__(message)
        self.result = result
        self.invocation = invocation
