"""Protection planning on the sink side of the cut.

The head nodes of the min-cut edges each hold one data unit after the
cut. Units whose cut edge lands directly on the sink cannot be helped;
the rest can reach the sink over more disjoint routes than units, and
that surplus is spent on coded redundancy. Combinations are fixed at the
coding nodes (tails of the earliest bottleneck edge of each route) and
ride the remaining route unchanged, so a single edge failure costs at
most one combination.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import _kernels
from .coding import CodingMatrix, cauchy_matrix, gf_inv, gf_mul
from .connectivity import partition_pre_post
from .graph import CutSet, NetworkGraph, max_flow, min_cut, sink_side_min_cut


def _postcut_view(g: NetworkGraph, cut: CutSet):
    """(nodes, index, edge ids) of the subgraph induced by the sink-side
    partition. Node and edge order follow the parent graph."""
    _, post = partition_pre_post(g, cut)
    nodes = [v for v in g.nodes if v in post]
    index = {v: i for i, v in enumerate(nodes)}
    edges = [
        eid for eid, (t, h) in enumerate(g.edges) if t in post and h in post
    ]
    return nodes, index, edges


def _group_max_flow(g, view, sources, skip=frozenset()):
    """Max flow from the source group to the sink inside the induced
    subgraph, via a virtual super-source. Returns (value, per-edge flow
    dict, per-source delivered counts)."""
    nodes, index, edges = view
    kept = [eid for eid in edges if eid not in skip]
    tails, heads, caps = [], [], []
    for eid in kept:
        t, h = g.edges[eid]
        tails.append(index[t])
        heads.append(index[h])
        caps.append(1)
    vs = len(nodes)
    big = len(kept) + 1
    sources = list(sources)
    for s in sources:
        tails.append(vs)
        heads.append(index[s])
        caps.append(big)
    value, flows = _kernels.unit_max_flow(
        len(nodes) + 1, tails, heads, caps, vs, index[g.sink]
    )
    edge_flow = {eid: flows[pos] for pos, eid in enumerate(kept)}
    delivered = {
        s: flows[len(kept) + pos] for pos, s in enumerate(sources)
    }
    return value, edge_flow, delivered


def _trace_paths(g, edge_flow, delivered):
    """Edge-disjoint unit paths from the delivered counts, one trace per
    unit, smallest-edge-id-first. Sources are visited in sorted order."""
    unused = {eid for eid, f in edge_flow.items() if f == 1}
    paths = []
    for s in sorted(delivered):
        for _ in range(delivered[s]):
            node = s
            path = []
            while node != g.sink:
                step = None
                for eid in g.out_edges[node]:
                    if eid in unused:
                        step = eid
                        break
                if step is None:
                    raise ValueError(f"group flow dead-ends at {node}")
                unused.discard(step)
                path.append(step)
                node = g.head(step)
            paths.append((s, tuple(path)))
    return paths


def compute_postcut_sets(g: NetworkGraph, cut: CutSet, routing=None):
    """(F_T, F'_T, m, n, e) for the sink side of the cut.

    F_T collects the cut edge heads, F'_T drops the sink itself, m
    counts the protectable units, n the disjoint routes they have to the
    sink, and e = n - m is the spare connectivity."""
    f_t = tuple(sorted({g.head(eid) for eid in cut.edges}))
    f_t_prime = tuple(v for v in f_t if v != g.sink)
    m = len(f_t_prime)
    if m == 0:
        return f_t, f_t_prime, 0, 0, 0
    view = _postcut_view(g, cut)
    n, _, _ = _group_max_flow(g, view, f_t_prime)
    return f_t, f_t_prime, m, n, n - m


def verify_theorem2(g: NetworkGraph, f_t_prime, cut: CutSet | None = None):
    """Checks the single-failure protection condition: every k units must
    reach the sink on at least k+1 edge-disjoint routes.

    Returns (True, None) when the condition holds, else (False, Q) with Q
    the smallest violating unit subset. On a graph whose min cut is
    unique the condition always holds; a violation would exhibit a second
    min cut."""
    units = sorted(f_t_prime)
    if not units:
        raise ValueError("no units to protect")
    if cut is None:
        cut = min_cut(g)
    view = _postcut_view(g, cut)
    for k in range(1, len(units) + 1):
        for q in itertools.combinations(units, k):
            value, _, _ = _group_max_flow(g, view, q)
            if value < k + 1:
                return False, q
    return True, None


def _full_recovery_condition(g, view, units, e):
    """Stronger variant: every k units reach the sink on k+e routes.
    When it holds, up to e failures still recover everything."""
    if e <= 1:
        return True
    for k in range(1, len(units) + 1):
        for q in itertools.combinations(units, k):
            value, _, _ = _group_max_flow(g, view, q)
            if value < k + e:
                return False
    return True


def _cutting_edges(g, view, paths, sources, n):
    """Per path, the earliest edge whose removal drops the group flow
    below n. Every route crosses each group bottleneck once, so such an
    edge exists; a path with none keeps its first edge as a fallback."""
    result = []
    for path in paths:
        chosen = path[0]
        for eid in path:
            value, _, _ = _group_max_flow(g, view, sources, skip={eid})
            if value == n - 1:
                chosen = eid
                break
        result.append(chosen)
    return tuple(result)


def select_coding_nodes(g: NetworkGraph, f_t_prime, paths, cut=None):
    """Tails of the earliest bottleneck edge of each route; combinations
    are formed there and copied downstream."""
    if cut is None:
        cut = min_cut(g)
    view = _postcut_view(g, cut)
    units = sorted(f_t_prime)
    cutting = _cutting_edges(g, view, paths, units, len(paths))
    return tuple(sorted({g.tail(eid) for eid in cutting}))


def _reach_map(g, view, units):
    """unit -> set of nodes it reaches inside the induced subgraph."""
    nodes, _, edges = view
    out = {v: [] for v in nodes}
    for eid in edges:
        out[g.tail(eid)].append(eid)
    result = {}
    for s in units:
        seen = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for eid in out[v]:
                h = g.head(eid)
                if h not in seen:
                    seen.add(h)
                    stack.append(h)
        result[s] = seen
    return result


def _effective_vector(matrix, reach, units, i):
    col = matrix.column(i)
    feed = set(reach[i])
    return tuple(
        col[j] if unit in feed else 0 for j, unit in enumerate(units)
    )


def _min_solvable(matrix, reach, units) -> int:
    m = len(units)
    n = matrix.n
    best = m
    for subset in itertools.combinations(range(n), m):
        vectors = [_effective_vector(matrix, reach, units, i) for i in subset]
        count = len(_solvable_units(vectors, m))
        if count < best:
            best = count
    return best


def _solvable_units(vectors, m):
    """Indices i with unit vector e_i in the GF(2^8) span of vectors."""
    basis = []
    for vec in vectors:
        row = list(vec)
        for pivot, prow in basis:
            if row[pivot]:
                factor = row[pivot]
                row = [a ^ gf_mul(factor, b) for a, b in zip(row, prow)]
        lead = next((j for j, a in enumerate(row) if a), None)
        if lead is not None:
            inv = gf_inv(row[lead])
            basis.append((lead, [gf_mul(inv, a) for a in row]))
    solvable = set()
    for i in range(m):
        row = [0] * m
        row[i] = 1
        for pivot, prow in basis:
            if row[pivot]:
                factor = row[pivot]
                row = [a ^ gf_mul(factor, b) for a, b in zip(row, prow)]
        if not any(row):
            solvable.add(i)
    return solvable


@dataclass(frozen=True)
class PostCutPlan:
    """Everything needed to code, route and recover the post-cut units.

    reach[i] lists the units whose data can feed combination i; the
    effective vector of a combination zeroes the Cauchy column at every
    unit outside that list."""

    graph: NetworkGraph
    f_t: tuple
    f_t_prime: tuple
    m: int
    n: int
    e: int
    sources: tuple
    paths: tuple
    cutting_edges: tuple
    coding_nodes: tuple
    matrix: CodingMatrix | None
    reach: tuple
    r: int
    theorem2_ok: bool
    theorem2_witness: tuple | None
    full_recovery: bool
    postcut_edges: frozenset

    def unit_index(self, unit) -> int:
        return self.f_t_prime.index(unit)

    def effective_vector(self, i):
        return _effective_vector(self.matrix, self.reach, self.f_t_prime, i)

    def summary(self) -> str:
        lines = [
            f"protectable units (m): {self.m}"
            + (f" [{', '.join(self.f_t_prime)}]" if self.m else ""),
            f"disjoint routes (n): {self.n}",
            f"spare connectivity (e): {self.e}",
            f"coding nodes (|Z|): {len(self.coding_nodes)}"
            + (f" [{', '.join(self.coding_nodes)}]" if self.coding_nodes else ""),
            f"recoverable from any {self.m} combinations (r): {self.r}",
            "single-failure condition: "
            + ("satisfied" if self.theorem2_ok else
               f"violated by {{{', '.join(self.theorem2_witness)}}}"),
        ]
        if self.m:
            word = "failure" if self.e == 1 else "failures"
            if self.full_recovery:
                lines.append(
                    f"guarantee: all {self.m} units for up to {self.e} {word}"
                )
            else:
                lines.append(
                    f"guarantee: all {self.m} units for 1 failure, "
                    f"at least {self.r} for {self.e} {word}"
                )
        return "\n".join(lines)

    def reach_csv(self) -> str:
        rows = ["path,source,coding_node,units"]
        for i, (s, path) in enumerate(zip(self.sources, self.paths)):
            z = self.graph.tail(self.cutting_edges[i])
            rows.append(f"{i},{s},{z},{';'.join(self.reach[i])}")
        return "\n".join(rows) + "\n"


def plan_postcut(g: NetworkGraph, cut: CutSet | None = None) -> PostCutPlan:
    """Full post-cut analysis of a single-cut graph."""
    flow = max_flow(g)
    if cut is None:
        cut = min_cut(g, flow)
        if cut.edges != sink_side_min_cut(g, flow).edges:
            raise ValueError("minimum cut is not unique")
    f_t, f_t_prime, m, n, e = compute_postcut_sets(g, cut)
    view = _postcut_view(g, cut)
    postcut_edges = frozenset(view[2])
    if m == 0:
        return PostCutPlan(
            graph=g, f_t=f_t, f_t_prime=f_t_prime, m=0, n=0, e=0,
            sources=(), paths=(), cutting_edges=(), coding_nodes=(),
            matrix=None, reach=(), r=0, theorem2_ok=True,
            theorem2_witness=None, full_recovery=True,
            postcut_edges=postcut_edges,
        )
    _, edge_flow, delivered = _group_max_flow(g, view, f_t_prime)
    tagged = _trace_paths(g, edge_flow, delivered)
    sources = tuple(s for s, _ in tagged)
    paths = tuple(p for _, p in tagged)
    cutting = _cutting_edges(g, view, paths, f_t_prime, n)
    coding_nodes = tuple(sorted({g.tail(eid) for eid in cutting}))
    matrix = cauchy_matrix(m, n)
    reach_full = _reach_map(g, view, f_t_prime)
    reach = tuple(
        tuple(u for u in f_t_prime if g.tail(cutting[i]) in reach_full[u])
        for i in range(n)
    )
    ok, witness = verify_theorem2(g, f_t_prime, cut)
    full = _full_recovery_condition(g, view, f_t_prime, e)
    return PostCutPlan(
        graph=g, f_t=f_t, f_t_prime=f_t_prime, m=m, n=n, e=e,
        sources=sources, paths=paths, cutting_edges=cutting,
        coding_nodes=coding_nodes, matrix=matrix, reach=reach,
        r=_min_solvable(matrix, reach, f_t_prime),
        theorem2_ok=ok, theorem2_witness=witness, full_recovery=full,
        postcut_edges=postcut_edges,
    )


def compute_r(plan: PostCutPlan) -> int:
    """Minimum, over every choice of m of the n combinations, of the
    number of units solvable from their effective vectors. With q = e
    failures at least m combinations survive, so at least r units are
    always recovered."""
    if plan.m == 0:
        return 0
    return _min_solvable(plan.matrix, plan.reach, plan.f_t_prime)


def simulate_postcut_failures(plan: PostCutPlan, failed_edges):
    """Recovered units after the given edges fail.

    A combination is lost when a failed edge lies anywhere on its route;
    the survivors reach the sink intact and are solved by elimination.
    Returns the recoverable unit names, sorted."""
    failed = set(failed_edges)
    outside = failed - plan.postcut_edges
    if outside:
        raise ValueError(f"failures outside the post-cut region: {sorted(outside)}")
    if plan.m == 0:
        return ()
    survivors = [
        i for i, path in enumerate(plan.paths) if not failed.intersection(path)
    ]
    vectors = [plan.effective_vector(i) for i in survivors]
    solvable = _solvable_units(vectors, plan.m)
    return tuple(plan.f_t_prime[j] for j in sorted(solvable))
