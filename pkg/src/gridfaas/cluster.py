"""Simulated federated-cluster topology the placement planner reasons over.

Nodes, directed network links, and replicated data items. Link lookups for
pairs absent from the table return the disconnected sentinel (None), which
makes any transfer over them infeasible. In-flight load per node is the only
mutable state and is guarded by the cluster lock.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidTopology, IoError, LoadUnderflow


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    site_name: str = ""
    compute_cost_per_invocation: float = 0.0
    capacity: int = 1

    def validate(self) -> None:
        if not self.node_id:
            raise InvalidTopology("node_id must not be empty")
        if self.compute_cost_per_invocation < 0:
            raise InvalidTopology(f"node {self.node_id!r}: compute cost must be non-negative")
        if self.capacity < 1:
            raise InvalidTopology(f"node {self.node_id!r}: capacity must be positive")


@dataclass(frozen=True)
class NetworkLink:
    from_node: str
    to_node: str
    latency_ms: float = 0.0
    cost_per_gib: float = 0.0
    bandwidth_gibps: float = 1.0

    def validate(self) -> None:
        if self.latency_ms < 0:
            raise InvalidTopology(f"link {self.from_node}->{self.to_node}: latency must be non-negative")
        if self.cost_per_gib < 0:
            raise InvalidTopology(f"link {self.from_node}->{self.to_node}: cost must be non-negative")
        if self.bandwidth_gibps <= 0:
            raise InvalidTopology(f"link {self.from_node}->{self.to_node}: bandwidth must be positive")
        if self.from_node == self.to_node and (self.latency_ms != 0 or self.cost_per_gib != 0):
            raise InvalidTopology(
                f"self-link on {self.from_node!r} must have zero latency and zero cost"
            )


@dataclass(frozen=True)
class DataItem:
    data_id: str
    size_bytes: int
    replica_nodes: frozenset[str]

    def validate(self) -> None:
        if not self.data_id:
            raise InvalidTopology("data_id must not be empty")
        if self.size_bytes < 0:
            raise InvalidTopology(f"data item {self.data_id!r}: size must be non-negative")
        if not self.replica_nodes:
            raise InvalidTopology(f"data item {self.data_id!r}: replica set must not be empty")


class ClusterState:
    """Nodes, links, data items, and per-node in-flight invocation counts."""

    def __init__(
        self,
        nodes: list[NodeSpec] | None = None,
        links: list[NetworkLink] | None = None,
        data_items: list[DataItem] | None = None,
        default_link: NetworkLink | None = None,
    ):
        self._lock = threading.Lock()
        self.nodes: dict[str, NodeSpec] = {}
        self.links: dict[tuple[str, str], NetworkLink] = {}
        self.data_items: dict[str, DataItem] = {}
        self.current_load: dict[str, int] = {}
        # Sentinel for node pairs missing from the link table. None means
        # disconnected: transfers over the pair are infeasible.
        self.default_link = default_link
        # Raw weights mapping from the topology file, if any.
        self.weights: dict = {}
        for node in nodes or []:
            self.add_node(node)
        for link in links or []:
            self.add_link(link)
        for item in data_items or []:
            self.register_data(item)

    @property
    def lock(self) -> threading.Lock:
        """Guards current_load; the planner's decide-and-increment holds it."""
        return self._lock

    def add_node(self, node: NodeSpec) -> None:
        node.validate()
        with self._lock:
            if node.node_id in self.nodes:
                raise InvalidTopology(f"duplicate node_id {node.node_id!r}")
            self.nodes[node.node_id] = node
            self.current_load[node.node_id] = 0

    def add_link(self, link: NetworkLink) -> None:
        link.validate()
        with self._lock:
            for end in (link.from_node, link.to_node):
                if end not in self.nodes:
                    raise InvalidTopology(f"link references unknown node {end!r}")
            self.links[(link.from_node, link.to_node)] = link

    def register_data(self, item: DataItem) -> None:
        item.validate()
        with self._lock:
            for node_id in item.replica_nodes:
                if node_id not in self.nodes:
                    raise InvalidTopology(
                        f"data item {item.data_id!r} replicated on unknown node {node_id!r}"
                    )
            self.data_items[item.data_id] = item

    def add_replica(self, data_id: str, node_id: str, size_bytes: int = 0) -> None:
        """Record ``data_id`` as present on ``node_id``, creating the item if new.

        Used after a successful invocation to assign its outputs to the
        executing node so later placements see the updated locality.
        """
        with self._lock:
            if node_id not in self.nodes:
                raise InvalidTopology(f"unknown node {node_id!r}")
            existing = self.data_items.get(data_id)
            if existing is None:
                self.data_items[data_id] = DataItem(
                    data_id=data_id,
                    size_bytes=size_bytes,
                    replica_nodes=frozenset({node_id}),
                )
            else:
                self.data_items[data_id] = DataItem(
                    data_id=data_id,
                    size_bytes=max(existing.size_bytes, size_bytes),
                    replica_nodes=existing.replica_nodes | {node_id},
                )

    def get_link(self, from_node: str, to_node: str) -> NetworkLink | None:
        """Link between two distinct nodes, or the disconnected sentinel."""
        if from_node == to_node:
            return NetworkLink(from_node, to_node, 0.0, 0.0, 1.0)
        return self.links.get((from_node, to_node), self.default_link)

    def update_load(self, node_id: str, delta: int) -> int:
        """Adjust a node's in-flight count; never drives it negative.

        An underflowing decrement clamps the count at zero and raises
        LoadUnderflow so the accounting bug is visible.
        """
        with self._lock:
            if node_id not in self.nodes:
                raise InvalidTopology(f"unknown node {node_id!r}")
            new = self.current_load[node_id] + delta
            if new < 0:
                self.current_load[node_id] = 0
                raise LoadUnderflow(
                    f"load on {node_id!r} would go negative ({new}); clamped to 0"
                )
            self.current_load[node_id] = new
            return new

    def sorted_nodes(self) -> list[NodeSpec]:
        return [self.nodes[k] for k in sorted(self.nodes)]


def single_node_cluster(node_id: str = "local") -> ClusterState:
    """Implicit topology used when no topology file is configured."""
    node = NodeSpec(node_id=node_id, site_name=node_id, compute_cost_per_invocation=0.0, capacity=1_000_000)
    return ClusterState(nodes=[node], links=[NetworkLink(node_id, node_id)])


def load_topology(path: Path | str) -> ClusterState:
    """Parse and validate a topology file.

    UTF-8 JSON with keys ``nodes``, ``links``, ``data_items``, ``weights``.
    The parsed weights are attached to the returned cluster as ``.weights``
    (a plain dict; absent keys fall back to planner defaults).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read topology {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IoError(
            f"corrupted topology {path}: {exc.msg} at line {exc.lineno} column {exc.colno}"
        ) from exc
    if not isinstance(doc, dict):
        raise InvalidTopology("topology document must be a JSON object")
    cluster = ClusterState()
    try:
        for obj in doc.get("nodes", []):
            cluster.add_node(
                NodeSpec(
                    node_id=obj["node_id"],
                    site_name=obj.get("site_name", ""),
                    compute_cost_per_invocation=float(obj.get("compute_cost_per_invocation", 0.0)),
                    capacity=int(obj.get("capacity", 1)),
                )
            )
        for obj in doc.get("links", []):
            cluster.add_link(
                NetworkLink(
                    from_node=obj["from_node"],
                    to_node=obj["to_node"],
                    latency_ms=float(obj.get("latency_ms", 0.0)),
                    cost_per_gib=float(obj.get("cost_per_gib", 0.0)),
                    bandwidth_gibps=float(obj.get("bandwidth_gibps", 1.0)),
                )
            )
        for obj in doc.get("data_items", []):
            cluster.register_data(
                DataItem(
                    data_id=obj["data_id"],
                    size_bytes=int(obj["size_bytes"]),
                    replica_nodes=frozenset(obj["replica_nodes"]),
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidTopology(f"malformed topology entry: {exc}") from exc
    weights = doc.get("weights", {})
    if not isinstance(weights, dict):
        raise InvalidTopology("weights must be a JSON object")
    cluster.weights = weights  # consumed by the planner's Weights.from_mapping
    return cluster
