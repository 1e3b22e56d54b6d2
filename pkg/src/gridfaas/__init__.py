"""gridfaas: a miniature FaaS platform for federated science pipelines.

Register runtime environments and functions in a catalog, invoke them over
HTTP through a gateway, let a data-locality cost planner pick the executing
node on a simulated cluster, and chain functions into linear workflows.
"""

from __future__ import annotations

from .catalog import (
    Catalog,
    CatalogSnapshot,
    EnvironmentSpec,
    FunctionSpec,
)
from .cluster import (
    ClusterState,
    DataItem,
    NetworkLink,
    NodeSpec,
    load_topology,
    single_node_cluster,
)
from .errors import (
    CapacityExhausted,
    CatalogError,
    DuplicateName,
    DuplicateRoute,
    EnvironmentInUse,
    ExecutorError,
    FaasError,
    Infeasible,
    InvalidSpec,
    InvalidTopology,
    InvokeTimeout,
    IoError,
    NoFeasibleNode,
    NotFound,
    PlannerError,
    RouteConflict,
    RuntimeCrashed,
    SchemaMismatch,
    SpawnFailure,
    StepFailed,
    UnknownEnvironment,
    ValidationError,
    WorkflowError,
)
from .executor import Executor, RuntimeHandle
from .gateway import Dispatcher, GatewayServer, build_platform, extract_data_refs
from .gridimage import (
    GridImage,
    MalformedGrid,
    blur,
    calibrate,
    flag,
    format_grid,
    parse_grid,
    read_grid,
    write_grid,
)
from .invocation import InvocationRequest, InvocationResult
from .planner import CostBreakdown, PlacementDecision, Weights, estimate_cost, plan
from .workflow import (
    WorkflowResult,
    WorkflowSpec,
    WorkflowStep,
    parse_workflow,
    run_workflow,
)

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "CatalogSnapshot",
    "EnvironmentSpec",
    "FunctionSpec",
    "ClusterState",
    "DataItem",
    "NetworkLink",
    "NodeSpec",
    "load_topology",
    "single_node_cluster",
    "CapacityExhausted",
    "CatalogError",
    "DuplicateName",
    "DuplicateRoute",
    "EnvironmentInUse",
    "ExecutorError",
    "FaasError",
    "Infeasible",
    "InvalidSpec",
    "InvalidTopology",
    "InvokeTimeout",
    "IoError",
    "NoFeasibleNode",
    "NotFound",
    "PlannerError",
    "RouteConflict",
    "RuntimeCrashed",
    "SchemaMismatch",
    "SpawnFailure",
    "StepFailed",
    "UnknownEnvironment",
    "ValidationError",
    "WorkflowError",
    "Executor",
    "RuntimeHandle",
    "Dispatcher",
    "GatewayServer",
    "build_platform",
    "extract_data_refs",
    "GridImage",
    "MalformedGrid",
    "blur",
    "calibrate",
    "flag",
    "format_grid",
    "parse_grid",
    "read_grid",
    "write_grid",
    "InvocationRequest",
    "InvocationResult",
    "CostBreakdown",
    "PlacementDecision",
    "Weights",
    "estimate_cost",
    "plan",
    "WorkflowResult",
    "WorkflowSpec",
    "WorkflowStep",
    "parse_workflow",
    "run_workflow",
]
