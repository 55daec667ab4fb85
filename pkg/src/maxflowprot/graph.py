"""Directed unit-capacity multigraphs and flow primitives.

A :class:`NetworkGraph` is an acyclic directed multigraph with one
distinguished source and sink. Every edge has capacity one; parallel edges
are allowed and are distinguished by their integer edge ids (assigned in
construction order). All flow operations run on the kernel backend in
:mod:`maxflowprot._kernels`.

The text format, one directive per line (``#`` starts a comment):

    source S
    sink T
    node A
    edge S A

``node`` lines are optional for endpoints that appear in some ``edge`` line;
serialization is canonical, so parse -> serialize is a fixed point.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import _kernels


class GraphFormatError(ValueError):
    """Raised for malformed graph text."""


class NetworkGraph:
    """Immutable DAG with unit-capacity edges and fixed source/sink.

    Args:
        nodes: node ids in declaration order (strings without whitespace).
        edges: (tail, head) pairs; position in the list is the edge id.
        source: source node id.
        sink: sink node id.
    """

    def __init__(self, nodes, edges, source, sink):
        self.nodes = tuple(nodes)
        self.edges = tuple((t, h) for t, h in edges)
        self.source = source
        self.sink = sink
        self._index = {v: i for i, v in enumerate(self.nodes)}
        if len(self._index) != len(self.nodes):
            raise ValueError("duplicate node id")
        for v in self.nodes:
            if not v or any(c.isspace() for c in v):
                raise ValueError(f"bad node id {v!r}")
        if source == sink:
            raise ValueError("source and sink must differ")
        for v in (source, sink):
            if v not in self._index:
                raise ValueError(f"{v!r} is not a declared node")
        self.out_edges = {v: [] for v in self.nodes}
        self.in_edges = {v: [] for v in self.nodes}
        for eid, (t, h) in enumerate(self.edges):
            if t not in self._index or h not in self._index:
                raise ValueError(f"edge {t!r}->{h!r} uses undeclared node")
            if t == h:
                raise ValueError(f"self loop at {t!r}")
            self.out_edges[t].append(eid)
            self.in_edges[h].append(eid)
        if not self.out_edges[source]:
            raise ValueError("source has no outgoing edge")
        if not self.in_edges[sink]:
            raise ValueError("sink has no incoming edge")
        self._topo = self._topological_order()

    def _topological_order(self):
        indeg = {v: len(self.in_edges[v]) for v in self.nodes}
        ready = deque(v for v in self.nodes if indeg[v] == 0)
        order = []
        while ready:
            v = ready.popleft()
            order.append(v)
            for eid in self.out_edges[v]:
                h = self.edges[eid][1]
                indeg[h] -= 1
                if indeg[h] == 0:
                    ready.append(h)
        if len(order) != len(self.nodes):
            raise ValueError("graph contains a cycle")
        return tuple(order)

    @property
    def num_nodes(self):
        return len(self.nodes)

    @property
    def num_edges(self):
        return len(self.edges)

    def index(self, node):
        return self._index[node]

    def has_node(self, node):
        return node in self._index

    def topological_order(self):
        return self._topo

    def tail(self, eid):
        return self.edges[eid][0]

    def head(self, eid):
        return self.edges[eid][1]

    def arrays(self):
        """(tails, heads, caps) index arrays for the flow kernels."""
        tails = [self._index[t] for t, _ in self.edges]
        heads = [self._index[h] for _, h in self.edges]
        return tails, heads, [1] * len(self.edges)

    def __repr__(self):
        return (
            f"NetworkGraph({self.num_nodes} nodes, {self.num_edges} edges, "
            f"{self.source}->{self.sink})"
        )


@dataclass(frozen=True)
class FlowAssignment:
    """An integral flow: total value plus per-edge units."""

    value: int
    edge_flow: tuple

    def validate(self, g: NetworkGraph):
        """Checks capacities and conservation; raises ValueError if broken."""
        if len(self.edge_flow) != g.num_edges:
            raise ValueError("flow length does not match edge count")
        for eid, f in enumerate(self.edge_flow):
            if f not in (0, 1):
                raise ValueError(f"edge {eid} carries {f}, capacity is 1")
        excess = {v: 0 for v in g.nodes}
        for eid, f in enumerate(self.edge_flow):
            if f:
                t, h = g.edges[eid]
                excess[t] -= f
                excess[h] += f
        for v in g.nodes:
            if v == g.source:
                if excess[v] != -self.value:
                    raise ValueError("source imbalance does not match value")
            elif v == g.sink:
                if excess[v] != self.value:
                    raise ValueError("sink imbalance does not match value")
            elif excess[v] != 0:
                raise ValueError(f"conservation violated at {v}")


@dataclass(frozen=True)
class CutSet:
    """An s-t edge cut with its two node sides."""

    edges: frozenset
    side_a: frozenset
    side_a_prime: frozenset


@dataclass(frozen=True)
class CommodityRouting:
    """Edge-disjoint unit paths, one per commodity, with their cut edges.

    paths[i] is a tuple of edge ids from source to sink; cutting_edge[i] is
    the unique min-cut edge on path i.
    """

    paths: tuple
    cutting_edge: tuple

    def node_path(self, g: NetworkGraph, i):
        seq = [g.tail(self.paths[i][0])]
        for eid in self.paths[i]:
            seq.append(g.head(eid))
        return tuple(seq)


def max_flow(g: NetworkGraph) -> FlowAssignment:
    """Maximum s-t flow. Value 0 is legal (disconnected source and sink)."""
    tails, heads, caps = g.arrays()
    value, flows = _kernels.unit_max_flow(
        g.num_nodes, tails, heads, caps, g.index(g.source), g.index(g.sink)
    )
    return FlowAssignment(value, tuple(flows))


def group_flow(g: NetworkGraph, from_set, to_set) -> int:
    """Max flow from a node group to a node group.

    Implemented with a virtual source/sink joined to the groups by
    high-capacity edges (capacity |E|+1 each, enough to never bind).
    """
    from_set = list(from_set)
    to_set = list(to_set)
    if not from_set or not to_set:
        raise ValueError("group_flow needs nonempty node groups")
    tails, heads, caps = g.arrays()
    vs = g.num_nodes
    vt = g.num_nodes + 1
    big = g.num_edges + 1
    for v in from_set:
        tails.append(vs)
        heads.append(g.index(v))
        caps.append(big)
    for v in to_set:
        tails.append(g.index(v))
        heads.append(vt)
        caps.append(big)
    value, _ = _kernels.unit_max_flow(g.num_nodes + 2, tails, heads, caps, vs, vt)
    return value


def min_cut(g: NetworkGraph, flow: FlowAssignment | None = None) -> CutSet:
    """The source-side minimum cut (edges leaving the residual-reachable set).

    This is the canonical cut reported everywhere; when the minimum cut is
    unique it is the only one.
    """
    if flow is None:
        flow = max_flow(g)
    tails, heads, caps = g.arrays()
    seen = _kernels.residual_reachable(
        g.num_nodes, tails, heads, caps, list(flow.edge_flow), g.index(g.source)
    )
    side_a = frozenset(v for v in g.nodes if seen[g.index(v)])
    cut = frozenset(
        eid
        for eid, (t, h) in enumerate(g.edges)
        if t in side_a and h not in side_a
    )
    return CutSet(cut, side_a, frozenset(set(g.nodes) - side_a))


def sink_side_min_cut(g: NetworkGraph, flow: FlowAssignment | None = None) -> CutSet:
    """The sink-side minimum cut (edges entering the set that reaches T)."""
    if flow is None:
        flow = max_flow(g)
    tails, heads, caps = g.arrays()
    seen = _kernels.residual_coreachable(
        g.num_nodes, tails, heads, caps, list(flow.edge_flow), g.index(g.sink)
    )
    side_b = frozenset(v for v in g.nodes if seen[g.index(v)])
    cut = frozenset(
        eid
        for eid, (t, h) in enumerate(g.edges)
        if t not in side_b and h in side_b
    )
    return CutSet(cut, frozenset(set(g.nodes) - side_b), side_b)


def assert_unique_min_cut(g: NetworkGraph) -> bool:
    """True iff the minimum s-t cut is unique.

    The source-side and sink-side cuts are the extreme elements of the
    lattice of minimum cuts; the cut is unique exactly when they coincide.
    """
    flow = max_flow(g)
    return min_cut(g, flow).edges == sink_side_min_cut(g, flow).edges


def decompose_into_paths(
    g: NetworkGraph, flow: FlowAssignment, cut: CutSet
) -> CommodityRouting:
    """Splits a max flow into edge-disjoint unit paths, one per commodity.

    Deterministic: paths are traced from the source in edge-id order,
    always continuing along the smallest unused flow-carrying edge. Each
    path is tagged with the min-cut edge it crosses.
    """
    flow.validate(g)
    if flow.value != len(cut.edges):
        raise ValueError("flow is not maximum for the given cut")
    unused = [f == 1 for f in flow.edge_flow]
    paths = []
    for start in g.out_edges[g.source]:
        if not unused[start]:
            continue
        path = [start]
        unused[start] = False
        node = g.head(start)
        while node != g.sink:
            nxt = None
            for eid in g.out_edges[node]:
                if unused[eid]:
                    nxt = eid
                    break
            if nxt is None:
                raise ValueError(f"flow dead-ends at {node}")
            path.append(nxt)
            unused[nxt] = False
            node = g.head(nxt)
        paths.append(tuple(path))
    if len(paths) != flow.value:
        raise ValueError("flow does not decompose into value-many paths")
    cutting = []
    for path in paths:
        on_cut = [eid for eid in path if eid in cut.edges]
        if len(on_cut) != 1:
            raise ValueError("path does not cross the cut exactly once")
        cutting.append(on_cut[0])
    return CommodityRouting(tuple(paths), tuple(cutting))


class ResidualView:
    """Residual graph of a flow: forward arcs for spare capacity, reverse
    arcs for carried flow. Arcs are (tail, head, edge_id, is_reverse)."""

    def __init__(self, g: NetworkGraph, flow: FlowAssignment):
        self.graph = g
        self.flow = flow
        self.arcs = []
        for eid, (t, h) in enumerate(g.edges):
            if flow.edge_flow[eid] == 0:
                self.arcs.append((t, h, eid, False))
            else:
                self.arcs.append((h, t, eid, True))
        self._adj = {v: [] for v in g.nodes}
        for i, (t, _, _, _) in enumerate(self.arcs):
            self._adj[t].append(i)

    def find_path(self, src, dst):
        """Shortest residual path as a list of arcs, or None."""
        parent = {src: None}
        q = deque([src])
        while q:
            u = q.popleft()
            if u == dst:
                break
            for ai in self._adj[u]:
                _, h, _, _ = self.arcs[ai]
                if h not in parent:
                    parent[h] = ai
                    q.append(h)
        if dst not in parent:
            return None
        path = []
        node = dst
        while parent[node] is not None:
            ai = parent[node]
            path.append(self.arcs[ai])
            node = self.arcs[ai][0]
        path.reverse()
        return path

    def apply(self, path) -> FlowAssignment:
        """Flow after augmenting one unit along a residual path."""
        edge_flow = list(self.flow.edge_flow)
        for _, _, eid, is_reverse in path:
            edge_flow[eid] = 0 if is_reverse else 1
        first_tail = path[0][0]
        last_head = path[-1][1]
        value = self.flow.value
        if first_tail == self.graph.source and last_head == self.graph.sink:
            value += 1
        return FlowAssignment(value, tuple(edge_flow))


def residual_view(g: NetworkGraph, flow: FlowAssignment) -> ResidualView:
    """Residual view of a flow over g."""
    return ResidualView(g, flow)


def parse_graph(text: str) -> NetworkGraph:
    """Parses the line-oriented graph format (see module docstring)."""
    nodes = []
    seen = set()
    edges = []
    source = None
    sink = None

    def add_node(v):
        if v not in seen:
            seen.add(v)
            nodes.append(v)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "node":
            if len(parts) != 2:
                raise GraphFormatError(f"line {lineno}: node takes one id")
            add_node(parts[1])
        elif kind == "edge":
            if len(parts) != 3:
                raise GraphFormatError(f"line {lineno}: edge takes tail and head")
            add_node(parts[1])
            add_node(parts[2])
            edges.append((parts[1], parts[2]))
        elif kind == "source":
            if len(parts) != 2 or source is not None:
                raise GraphFormatError(f"line {lineno}: bad source directive")
            source = parts[1]
            add_node(source)
        elif kind == "sink":
            if len(parts) != 2 or sink is not None:
                raise GraphFormatError(f"line {lineno}: bad sink directive")
            sink = parts[1]
            add_node(sink)
        else:
            raise GraphFormatError(f"line {lineno}: unknown directive {kind!r}")
    if source is None or sink is None:
        raise GraphFormatError("source and sink directives are required")
    try:
        return NetworkGraph(nodes, edges, source, sink)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc


def serialize_graph(g: NetworkGraph) -> str:
    """Canonical text form: source, sink, nodes in graph order, edges in
    id order."""
    lines = [f"source {g.source}", f"sink {g.sink}"]
    for v in g.nodes:
        lines.append(f"node {v}")
    for t, h in g.edges:
        lines.append(f"edge {t} {h}")
    return "\n".join(lines) + "\n"
