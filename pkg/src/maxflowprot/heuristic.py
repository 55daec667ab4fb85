"""Three-phase planner for pre-cut protection.

Phase 1 greedily picks decoding candidates and routes them redundant flow
on two coupled residual copies of the pre-cut subgraph. Phase 2 reconciles
the copies and restores the full S-T' max-flow. Phase 3 pushes whatever
extra connectivity remains to nodes already sitting on routed paths.

The final plan is recomputed from the resulting flow state, so the
bookkeeping kept during the phases never leaks approximations into the
reported numbers.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field

from . import _kernels
from .connectivity import PreCutSubgraph, build_precut_subgraph
from .graph import NetworkGraph, max_flow, min_cut, sink_side_min_cut


class InconsistentFlowError(RuntimeError):
    """The phases drove the flow state somewhere no valid plan exists.

    Reaching this indicates a bug: on a valid single-cut input the
    reconciled residual always admits the full max-flow."""


FORWARD, REVERSED, DELETED = 0, 1, 2


class ResidualCopy:
    """Orientation state of one residual copy of the pre-cut subgraph.

    Each edge is forward (spare capacity), reversed (carrying one unit), or
    deleted (masked out by cross-copy coupling). Flow values and committed
    augmentations both run on the kernel backend.
    """

    def __init__(self, g: NetworkGraph):
        self.graph = g
        self.state = [FORWARD] * g.num_edges

    def _residual_arrays(self):
        g = self.graph
        tails = []
        heads = []
        caps = []
        for eid, (t, h) in enumerate(g.edges):
            ti, hi = g.index(t), g.index(h)
            if self.state[eid] == REVERSED:
                tails.append(hi)
                heads.append(ti)
                caps.append(1)
            else:
                tails.append(ti)
                heads.append(hi)
                caps.append(1 if self.state[eid] == FORWARD else 0)
        return tails, heads, caps

    def flow_value(self, src, dst) -> int:
        g = self.graph
        tails, heads, caps = self._residual_arrays()
        value, _ = _kernels.unit_max_flow(
            g.num_nodes, tails, heads, caps, g.index(src), g.index(dst)
        )
        return value

    def push(self, src, dst, amount) -> int:
        """Commits up to `amount` augmenting units src->dst and returns how
        many went through. Edge states flip along the augmenting paths."""
        if amount <= 0:
            return 0
        g = self.graph
        tails, heads, caps = self._residual_arrays()
        limiter = g.num_nodes
        for _ in range(amount):
            tails.append(limiter)
            heads.append(g.index(src))
            caps.append(1)
        value, flows = _kernels.unit_max_flow(
            g.num_nodes + 1, tails, heads, caps, limiter, g.index(dst)
        )
        for eid in range(g.num_edges):
            if flows[eid]:
                self.state[eid] = (
                    FORWARD if self.state[eid] == REVERSED else REVERSED
                )
        return value

    def reversed_ids(self):
        return [eid for eid, s in enumerate(self.state) if s == REVERSED]


def _hop_distances(g: NetworkGraph, start):
    dist = {start: 0}
    q = deque([start])
    while q:
        v = q.popleft()
        for eid in g.out_edges[v]:
            h = g.head(eid)
            if h not in dist:
                dist[h] = dist[v] + 1
                q.append(h)
    return dist


def _decompose_state(g: NetworkGraph, flow_edges):
    """Splits a set of unit flow edges into source-rooted traces.

    Traces continue along the smallest unused flow edge and are absorbed
    where none remains. Returns (sink_paths, absorbed) where absorbed holds
    (edge_tuple, end_node) pairs.
    """
    unused = set(flow_edges)
    sink_paths = []
    absorbed = []
    for start in g.out_edges[g.source]:
        if start not in unused:
            continue
        path = [start]
        unused.discard(start)
        node = g.head(start)
        while node != g.sink:
            nxt = None
            for eid in g.out_edges[node]:
                if eid in unused:
                    nxt = eid
                    break
            if nxt is None:
                break
            path.append(nxt)
            unused.discard(nxt)
            node = g.head(nxt)
        if node == g.sink:
            sink_paths.append(tuple(path))
        else:
            absorbed.append((tuple(path), node))
    if unused:
        raise InconsistentFlowError("flow state does not decompose cleanly")
    return sink_paths, absorbed


@dataclass
class PlannerState:
    """Mutable state threaded through the three phases."""

    subgraph: PreCutSubgraph
    h: int
    seed: int
    copy_s: ResidualCopy
    copy_t: ResidualCopy
    x_initial: list = field(default_factory=list)
    flow_s: dict = field(default_factory=dict)
    flow_t: dict = field(default_factory=dict)
    st_flow: int = 0
    merged: ResidualCopy | None = None


@dataclass(frozen=True)
class PreCutPlan:
    """Final routing plus the decoding-node bookkeeping.

    routed_paths are H edge-id tuples (dummy-sink form); extra_paths carry
    the absorbed redundancy traces with their end nodes. flow_s/flow_t are
    keyed by decoding node: units received from S and units forwarded on.
    """

    subgraph: PreCutSubgraph
    x_nodes: tuple
    flow_s: dict
    flow_t: dict
    routed_paths: tuple
    extra_paths: tuple
    protected: tuple
    protected_count: int
    st_flow: int

    def node_paths(self):
        g = self.subgraph.graph
        out = []
        for path in self.routed_paths:
            nodes = [g.tail(path[0])]
            for eid in path:
                nodes.append(g.head(eid))
            out.append(tuple(nodes))
        return tuple(out)

    def in_paths(self, x):
        """Edge-disjoint S->x unit paths: prefixes of the routed paths that
        pass x, then the extra traces absorbed at x."""
        g = self.subgraph.graph
        found = []
        for path in self.routed_paths:
            prefix = []
            for eid in path:
                prefix.append(eid)
                if g.head(eid) == x:
                    found.append(tuple(prefix))
                    break
        for trace, end in self.extra_paths:
            if end == x:
                found.append(trace)
        return found

    def report(self) -> str:
        g = self.subgraph.graph
        x_entries = [
            {"node": u, "flow_s": self.flow_s[u], "flow_t": self.flow_t[u]}
            for u in self.x_nodes
        ]
        path_entries = []
        for i, nodes in enumerate(self.node_paths()):
            path_entries.append(
                {"nodes": list(nodes), "protected": self.protected[i]}
            )
        doc = {
            "source": g.source,
            "sink": self.subgraph.virtual_sink,
            "st_flow": self.st_flow,
            "x": x_entries,
            "paths": path_entries,
            "protected_count": self.protected_count,
        }
        return json.dumps(doc, indent=2)


def phase1_select(subgraph: PreCutSubgraph, seed: int = 0) -> PlannerState:
    """Greedy selection loop over both residual copies.

    Candidates are nodes that can still forward at least one unit to the
    dummy sink while receiving strictly more from S; the largest forwarding
    value wins, then the largest hop distance from S, then a seeded random
    draw. Selected nodes get their forwarding paths plus one extra unit."""
    g = subgraph.graph
    h = max_flow(g).value
    state = PlannerState(
        subgraph, h, seed, ResidualCopy(g), ResidualCopy(g)
    )
    rng = random.Random(seed)
    hops = _hop_distances(g, g.source)
    sink = subgraph.virtual_sink
    while True:
        best = []
        best_ft = 0
        for u in g.nodes:
            if u == g.source or u == sink:
                continue
            ft = state.copy_t.flow_value(u, sink)
            if ft < 1 or ft < best_ft:
                continue
            fs = state.copy_s.flow_value(g.source, u)
            if fs <= ft:
                continue
            if ft > best_ft:
                best_ft = ft
                best = [u]
            else:
                best.append(u)
        if not best:
            break
        if len(best) > 1:
            top = max(hops.get(u, -1) for u in best)
            best = [u for u in best if hops.get(u, -1) == top]
        x = best[0] if len(best) == 1 else rng.choice(sorted(best))
        pushed_s = state.copy_s.push(g.source, x, best_ft + 1)
        if pushed_s != best_ft + 1:
            raise InconsistentFlowError("phase 1 lost source capacity")
        _cross_delete(state.copy_s, state.copy_t)
        sendable = min(best_ft, state.copy_t.flow_value(x, sink))
        state.copy_t.push(x, sink, sendable)
        _cross_delete(state.copy_t, state.copy_s)
        if x not in state.x_initial:
            state.x_initial.append(x)
        state.flow_s[x] = state.flow_s.get(x, 0) + best_ft + 1
        state.flow_t[x] = state.flow_t.get(x, 0) + sendable
        state.st_flow += sendable
    return state


def _cross_delete(source_copy: ResidualCopy, target_copy: ResidualCopy):
    """Couples the copies: an edge carrying flow in one may no longer be
    used forward in the other."""
    for eid in source_copy.reversed_ids():
        if target_copy.state[eid] == FORWARD:
            target_copy.state[eid] = DELETED


def phase2_max_flow(state: PlannerState) -> PlannerState:
    """Merges the copies' flows into one residual and restores flow h.

    Plain S-T' augmentation may stall short of h when phase 1 invested too
    much spare capacity into extras. In that case single extras are
    converted back into path units: an augmentation starting at a node
    holding an absorbed unit extends that unit to T'. One of the two kinds
    of augmenting path always exists while the flow is below h, so the
    loop terminates at exactly h."""
    g = state.subgraph.graph
    sink = state.subgraph.virtual_sink
    merged = ResidualCopy(g)
    for eid in range(g.num_edges):
        s_rev = state.copy_s.state[eid] == REVERSED
        t_rev = state.copy_t.state[eid] == REVERSED
        if s_rev and t_rev:
            raise InconsistentFlowError("edge carries flow in both copies")
        if s_rev or t_rev:
            merged.state[eid] = REVERSED
    state.merged = merged
    state.st_flow += merged.push(g.source, sink, state.h - state.st_flow)
    while state.st_flow < state.h:
        if merged.push(g.source, sink, 1) == 1:
            state.st_flow += 1
            continue
        _, absorbed = _decompose_state(g, merged.reversed_ids())
        for node in sorted({end for _, end in absorbed}):
            if merged.push(node, sink, 1) == 1:
                state.st_flow += 1
                break
        else:
            raise InconsistentFlowError("could not restore the max-flow")
    return state


def phase3_utilize_residual(state: PlannerState) -> PreCutPlan:
    """Pushes leftover S-side connectivity to nodes on routed paths, then
    derives the final plan from the resulting flow state."""
    g = state.subgraph.graph
    sink = state.subgraph.virtual_sink
    merged = state.merged
    if merged is None:
        raise ValueError("phase 2 must run before phase 3")
    for u in g.topological_order():
        if u == g.source or u == sink:
            continue
        paths, _ = _decompose_state(g, merged.reversed_ids())
        on_path = any(
            u in {g.head(eid) for eid in path[:-1]} for path in paths
        )
        if not on_path:
            continue
        spare = merged.flow_value(g.source, u)
        if spare > 0:
            merged.push(g.source, u, spare)
    return _finalize(state)


def _finalize(state: PlannerState) -> PreCutPlan:
    g = state.subgraph.graph
    paths, absorbed = _decompose_state(g, state.merged.reversed_ids())
    if len(paths) != state.h:
        raise InconsistentFlowError("final state lost routed paths")
    through = {}
    for path in paths:
        for eid in path[:-1]:
            node = g.head(eid)
            through[node] = through.get(node, 0) + 1
    extra = {}
    for _, end in absorbed:
        extra[end] = extra.get(end, 0) + 1
    x_nodes = tuple(
        sorted(u for u in extra if extra[u] >= 1 and through.get(u, 0) >= 1)
    )
    flow_t = {u: through[u] for u in x_nodes}
    flow_s = {u: through[u] + extra[u] for u in x_nodes}
    x_set = set(x_nodes)
    flags = []
    for path in paths:
        nodes = {g.head(eid) for eid in path[:-1]}
        flags.append(bool(nodes & x_set))
    return PreCutPlan(
        subgraph=state.subgraph,
        x_nodes=x_nodes,
        flow_s=flow_s,
        flow_t=flow_t,
        routed_paths=tuple(paths),
        extra_paths=tuple(absorbed),
        protected=tuple(flags),
        protected_count=sum(flags),
        st_flow=state.st_flow,
    )


def run_heuristic(g: NetworkGraph, seed: int = 0) -> PreCutPlan:
    """Full pipeline: validate the cut, transform, run the three phases."""
    flow = max_flow(g)
    if flow.value < 1:
        raise ValueError("no source-sink connectivity")
    cut = min_cut(g, flow)
    if cut.edges != sink_side_min_cut(g, flow).edges:
        raise ValueError("minimum cut is not unique")
    subgraph = build_precut_subgraph(g, cut)
    state = phase1_select(subgraph, seed)
    state = phase2_max_flow(state)
    return phase3_utilize_residual(state)
