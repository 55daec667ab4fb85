"""Node classification and the pre-cut subgraph transformation.

Nodes split by how their connectivity compares to the max-flow h: a node
with extra source connectivity (more flow available from S than the cut
admits past it) can receive redundancy; a node with extra destination
connectivity can fan data out toward the sink. The unique min-cut induces
the pre-cut / post-cut node partition used everywhere downstream.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

from .graph import CutSet, NetworkGraph, group_flow, max_flow, min_cut


class NodeClass(Enum):
    WESC = "wESC"
    WEDC = "wEDC"
    WNEC = "wNEC"
    SOURCE = "source"
    SINK = "sink"


def classify_node(g: NetworkGraph, cut: CutSet, u) -> NodeClass:
    """Classifies an interior node by its two group-flow tests.

    A node is wESC when f^S({u,T}) exceeds h while f^({S,u})(T) stays at h,
    wEDC in the mirrored case, and wNEC when neither flow exceeds h. The two
    strict cases cannot hold at once.
    """
    if u in (g.source, g.sink):
        raise ValueError("classify_node takes interior nodes only")
    if not g.has_node(u):
        raise ValueError(f"unknown node {u!r}")
    h = len(cut.edges)
    to_pair = group_flow(g, [g.source], [u, g.sink])
    from_pair = group_flow(g, [g.source, u], [g.sink])
    extra_src = to_pair > h
    extra_dst = from_pair > h
    if extra_src and extra_dst:
        raise AssertionError(f"node {u} shows both extra connectivities")
    if extra_src:
        return NodeClass.WESC
    if extra_dst:
        return NodeClass.WEDC
    return NodeClass.WNEC


def partition_pre_post(g: NetworkGraph, cut: CutSet):
    """(A, A'): nodes reachable from S once the cut edges are deleted, and
    the rest."""
    blocked = cut.edges
    seen = {g.source}
    q = deque([g.source])
    while q:
        v = q.popleft()
        for eid in g.out_edges[v]:
            if eid in blocked:
                continue
            h = g.head(eid)
            if h not in seen:
                seen.add(h)
                q.append(h)
    pre = frozenset(seen)
    return pre, frozenset(set(g.nodes) - seen)


def ec(g: NetworkGraph, u) -> int:
    """Extra connectivity of u beyond the max-flow: f^S({u,T}) - f^S(T).

    Zero for the endpoints by convention (they carry no extra units)."""
    if u in (g.source, g.sink):
        return 0
    h = max_flow(g).value
    return group_flow(g, [g.source], [u, g.sink]) - h


def esc_total(g: NetworkGraph, cut: CutSet) -> int:
    """Total extra source connectivity: f^S(A \\ {S} ∪ {T}) - h.

    This is the shared budget of extra units the pre-cut side can absorb;
    individual nodes' extras may overlap inside it."""
    pre, _ = partition_pre_post(g, cut)
    candidates = sorted(pre - {g.source})
    if not candidates:
        return 0
    h = len(cut.edges)
    return group_flow(g, [g.source], candidates + [g.sink]) - h


@dataclass(frozen=True)
class PreCutSubgraph:
    """The pre-cut side of the network with a dummy sink.

    graph: nodes A plus the dummy sink; internal A edges preserved; one
    dummy-sink edge per min-cut edge (parallel edges when one node tails
    several cut edges).
    virtual_sink: the dummy sink's node id.
    f_s: tails of the min-cut edges.
    edge_map: H edge id -> originating edge id in the source graph (cut
    edges map to their dummy-sink replacements).
    """

    graph: NetworkGraph
    virtual_sink: str
    f_s: frozenset
    edge_map: tuple

    def cut_edge_ids(self):
        """H edge ids entering the dummy sink, in edge-id order."""
        gh = self.graph
        return tuple(
            eid for eid in range(gh.num_edges) if gh.head(eid) == self.virtual_sink
        )


def build_precut_subgraph(g: NetworkGraph, cut: CutSet) -> PreCutSubgraph:
    """Restricts g to the pre-cut side and reroutes cut edges to a fresh
    dummy sink, preserving the flow value h."""
    pre, _ = partition_pre_post(g, cut)
    sink_name = g.sink + "'"
    while g.has_node(sink_name):
        sink_name += "'"
    nodes = [v for v in g.nodes if v in pre] + [sink_name]
    edges = []
    edge_map = []
    for eid, (t, h) in enumerate(g.edges):
        if eid in cut.edges:
            edges.append((t, sink_name))
            edge_map.append(eid)
        elif t in pre and h in pre:
            edges.append((t, h))
            edge_map.append(eid)
    sub = NetworkGraph(nodes, edges, g.source, sink_name)
    tails = frozenset(g.tail(eid) for eid in cut.edges)
    return PreCutSubgraph(sub, sink_name, tails, tuple(edge_map))


@dataclass(frozen=True)
class ConnectivityReport:
    """Per-node classes and the connectivity quantities of one graph."""

    classes: dict
    ec_values: dict
    esc: int
    pre_cut: frozenset
    post_cut: frozenset

    def to_csv(self) -> str:
        lines = ["node,class,ec"]
        for node in self.classes:
            lines.append(
                f"{node},{self.classes[node].value},{self.ec_values[node]}"
            )
        return "\n".join(lines) + "\n"


def connectivity_report(g: NetworkGraph, cut: CutSet | None = None) -> ConnectivityReport:
    """Classifies every node and collects EC/ESC and the partition."""
    if cut is None:
        cut = min_cut(g)
    classes = {}
    ecs = {}
    for v in g.nodes:
        if v == g.source:
            classes[v] = NodeClass.SOURCE
        elif v == g.sink:
            classes[v] = NodeClass.SINK
        else:
            classes[v] = classify_node(g, cut, v)
        ecs[v] = ec(g, v)
    pre, post = partition_pre_post(g, cut)
    return ConnectivityReport(classes, ecs, esc_total(g, cut), pre, post)
