"""Execution planner: pick the cheapest feasible node for each invocation.

Cost of running on a node, given the data items the invocation references:

    transfer_cost = alpha * sum over items of min over replicas r of
                    size_gib(item) * cost_per_gib(r -> node)
    latency_cost  = beta * max over chosen source nodes of latency_ms(r -> node)
    compute_cost  = gamma * compute_cost_per_invocation(node)

Items already replicated on the candidate node contribute nothing. Unknown
item ids are outputs still to be created and also contribute nothing. Per
item the source replica is the one with the cheapest transfer term (ties by
node id); latency uses that chosen source. A node at capacity, or one whose
inputs are only reachable over disconnected pairs, is infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cluster import ClusterState, NodeSpec
from .errors import Infeasible, NoFeasibleNode

GIB = 1024 ** 3


@dataclass(frozen=True)
class Weights:
    alpha: float = 1.0    # per abstract cost unit of transfer
    beta: float = 0.001   # per ms of worst source latency
    gamma: float = 1.0    # per abstract compute cost unit

    @classmethod
    def from_mapping(cls, obj: dict | None) -> Weights:
        obj = obj or {}
        return cls(
            alpha=float(obj.get("alpha", cls.alpha)),
            beta=float(obj.get("beta", cls.beta)),
            gamma=float(obj.get("gamma", cls.gamma)),
        )


@dataclass(frozen=True)
class Transfer:
    data_id: str
    source_node: str
    bytes: int


@dataclass(frozen=True)
class CostBreakdown:
    transfer_cost: float
    latency_cost: float
    compute_cost: float

    @property
    def total(self) -> float:
        return self.transfer_cost + self.latency_cost + self.compute_cost


@dataclass(frozen=True)
class PlacementDecision:
    node_id: str
    total_cost: float
    breakdown: CostBreakdown
    transfers: tuple[Transfer, ...] = ()


def estimate_cost(
    node: NodeSpec,
    data_refs: list[str],
    cluster: ClusterState,
    weights: Weights,
) -> tuple[CostBreakdown, tuple[Transfer, ...]]:
    """Cost breakdown for running on ``node``; raises Infeasible when it can't."""
    if cluster.current_load.get(node.node_id, 0) >= node.capacity:
        raise Infeasible(f"node {node.node_id!r} is at capacity")
    transfer_sum = 0.0
    worst_latency = 0.0
    transfers: list[Transfer] = []
    for ref in data_refs:
        item = cluster.data_items.get(ref)
        if item is None:
            continue  # output still to be created: no transfer needed
        if node.node_id in item.replica_nodes:
            continue  # already local: zero transfer, zero latency
        size_gib = item.size_bytes / GIB
        best: tuple[float, str] | None = None
        for source in sorted(item.replica_nodes):
            link = cluster.get_link(source, node.node_id)
            if link is None:
                continue  # disconnected pair
            term = size_gib * link.cost_per_gib
            if best is None or term < best[0]:
                best = (term, source)
        if best is None:
            raise Infeasible(
                f"data item {ref!r} is unreachable from node {node.node_id!r}"
            )
        term, source = best
        transfer_sum += term
        link = cluster.get_link(source, node.node_id)
        worst_latency = max(worst_latency, link.latency_ms)
        transfers.append(Transfer(data_id=ref, source_node=source, bytes=item.size_bytes))
    breakdown = CostBreakdown(
        transfer_cost=weights.alpha * transfer_sum,
        latency_cost=weights.beta * worst_latency,
        compute_cost=weights.gamma * node.compute_cost_per_invocation,
    )
    return breakdown, tuple(transfers)


def plan(
    data_refs: list[str],
    cluster: ClusterState,
    weights: Weights,
    account_load: bool = True,
) -> PlacementDecision:
    """Argmin of total cost over feasible nodes; ties go to the smallest node id.

    Increments the chosen node's in-flight count when ``account_load`` is
    true; the caller must decrement it once the invocation completes. The
    decide-and-increment step runs under the cluster lock so concurrent
    plans see each other's load.
    """
    with cluster.lock:
        best: tuple[float, str, CostBreakdown, tuple[Transfer, ...]] | None = None
        for node in [cluster.nodes[k] for k in sorted(cluster.nodes)]:
            try:
                breakdown, transfers = estimate_cost(node, data_refs, cluster, weights)
            except Infeasible:
                continue
            key = (breakdown.total, node.node_id)
            if best is None or key < (best[0], best[1]):
                best = (breakdown.total, node.node_id, breakdown, transfers)
        if best is None:
            raise NoFeasibleNode(f"no feasible node for data refs {data_refs!r}")
        total, node_id, breakdown, transfers = best
        if account_load:
            cluster.current_load[node_id] += 1
        return PlacementDecision(
            node_id=node_id,
            total_cost=total,
            breakdown=breakdown,
            transfers=transfers,
        )
