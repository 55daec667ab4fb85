"""Exact planner and model tooling.

The optimizer enumerates commodity routings on the pre-cut subgraph with
branch-and-bound, maximizing the number of protected paths first and the
summed hop depth of the protecting nodes second. A text model emitter, a
matching parser, an assignment validator, and a coverage-gadget generator
round out the module.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import _kernels
from .connectivity import PreCutSubgraph, build_precut_subgraph
from .graph import (
    CommodityRouting,
    NetworkGraph,
    max_flow,
    min_cut,
    sink_side_min_cut,
)
from .heuristic import DELETED, ResidualCopy, _decompose_state, _hop_distances, run_heuristic


class _Stop(Exception):
    pass


class SearchBudget:
    """Node and wall-clock limits for the search.

    tick() is called once per explored search node and flips `exhausted`
    when a limit is crossed; the search then returns its best incumbent.
    """

    def __init__(self, max_nodes=None, max_seconds=None):
        self.max_nodes = max_nodes
        self.max_seconds = max_seconds
        self.nodes = 0
        self.exhausted = False
        self._deadline = None

    def start(self):
        self.nodes = 0
        self.exhausted = False
        if self.max_seconds is not None:
            self._deadline = time.monotonic() + self.max_seconds
        return self

    def tick(self) -> bool:
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            self.exhausted = True
        elif self._deadline is not None and time.monotonic() > self._deadline:
            self.exhausted = True
        return self.exhausted


@dataclass(frozen=True)
class ExactSolution:
    """Optimal (or best-within-budget) protection plan.

    routing holds the h edge-disjoint paths on the pre-cut subgraph;
    extra_paths pairs each decoding node with its single extra unit's path.
    objective = w * protected_count + delta with w the subgraph edge count.
    """

    subgraph: PreCutSubgraph
    routing: CommodityRouting
    x_nodes: tuple
    extra_paths: tuple
    protected: tuple
    protected_count: int
    delta: int
    objective: int
    exhausted: bool

    def node_paths(self):
        g = self.subgraph.graph
        return tuple(
            self.routing.node_path(g, i) for i in range(len(self.routing.paths))
        )


class _Searcher:
    """Branch-and-bound over ordered commodity routings.

    Commodity i must end on the i-th dummy-sink edge, which removes path
    permutations from the search space. Partial systems are pruned when the
    residual cannot carry the remaining commodities or when an optimistic
    protection bound cannot beat the incumbent.
    """

    def __init__(self, sub: PreCutSubgraph, budget: SearchBudget):
        self.sub = sub
        self.g = sub.graph
        self.sink = sub.virtual_sink
        self.cut_ids = sub.cut_edge_ids()
        self.h = len(self.cut_ids)
        self.d = _hop_distances(self.g, self.g.source)
        self.budget = budget
        self.best = None  # (count, delta, encoding, paths, x, extras)

    def _interiors(self, paths):
        g = self.g
        return [frozenset(g.head(e) for e in p[:-1]) for p in paths]

    def _offer(self, paths, x_nodes, extras_fn):
        interiors = self._interiors(paths)
        xs = frozenset(x_nodes)
        count = sum(1 for nodes in interiors if nodes & xs)
        delta = sum(self.d[u] for nodes in interiors for u in nodes & xs)
        encoding = (tuple(paths), tuple(sorted(xs)))
        if self.best is not None:
            bc, bd, benc = self.best[0], self.best[1], self.best[2]
            if (count, delta) < (bc, bd):
                return
            if (count, delta) == (bc, bd) and encoding >= benc:
                return
        self.best = (count, delta, encoding, tuple(paths), tuple(sorted(xs)), extras_fn())

    def seed(self, paths, x_nodes, extras):
        by_cut = {p[-1]: p for p in paths}
        ordered = tuple(by_cut[c] for c in self.cut_ids)
        self._offer(ordered, x_nodes, lambda: tuple(sorted(extras.items())))

    def run(self):
        self.budget.start()
        try:
            self._extend(0, frozenset(), [])
        except _Stop:
            pass

    def _residual_value(self, used) -> int:
        g = self.g
        tails, heads, caps = g.arrays()
        for e in used:
            caps[e] = 0
        value, _ = _kernels.unit_max_flow(
            g.num_nodes, tails, heads, caps, g.index(g.source), g.index(self.sink)
        )
        return value

    def _reachable(self, used):
        g = self.g
        seen = {g.source}
        stack = [g.source]
        while stack:
            v = stack.pop()
            for e in g.out_edges[v]:
                if e in used:
                    continue
                hd = g.head(e)
                if hd not in seen:
                    seen.add(hd)
                    stack.append(hd)
        return seen

    def _paths_to(self, target, used):
        g = self.g
        sink = self.sink
        acc = []

        def dfs(node):
            if node == target:
                yield tuple(acc)
                return
            for e in g.out_edges[node]:
                if e in used:
                    continue
                hd = g.head(e)
                if hd == sink:
                    continue
                acc.append(e)
                yield from dfs(hd)
                acc.pop()

        yield from dfs(g.source)

    def _extend(self, i, used, fixed):
        if self.budget.tick():
            raise _Stop
        if i == self.h:
            self._leaf(fixed)
            return
        if self._residual_value(used) < self.h - i:
            return
        if self.best is not None:
            reach = self._reachable(used)
            ub = sum(
                1 for nodes in self._interiors(fixed) if nodes & reach
            ) + (self.h - i)
            if ub < self.best[0]:
                return
        cut = self.cut_ids[i]
        target = self.g.tail(cut)
        for path in self._paths_to(target, used):
            full = path + (cut,)
            self._extend(i + 1, used | frozenset(full), fixed + [full])

    def _leaf(self, fixed):
        if self.budget.tick():
            raise _Stop
        g = self.g
        paths = tuple(fixed)
        self._offer(paths, (), tuple)
        interiors = self._interiors(paths)
        cands = sorted(set().union(*interiors)) if interiors else []
        if not cands:
            return
        state = ResidualCopy(g)
        for p in paths:
            for e in p:
                state.state[e] = DELETED
        d = self.d

        def cover(xs):
            return sum(1 for nodes in interiors if nodes & xs)

        def delta(xs):
            return sum(d[u] for nodes in interiors for u in nodes & xs)

        def extras_now():
            _, absorbed = _decompose_state(g, state.reversed_ids())
            return tuple(sorted((end, trace) for trace, end in absorbed))

        chosen = []

        def rec(idx):
            if self.budget.tick():
                raise _Stop
            if idx == len(cands):
                return
            optimistic = frozenset(chosen) | frozenset(cands[idx:])
            if self.best is not None:
                if (cover(optimistic), delta(optimistic)) < self.best[:2]:
                    return
            cand = cands[idx]
            snapshot = state.state[:]
            if state.push(g.source, cand, 1) == 1:
                chosen.append(cand)
                self._offer(paths, chosen, extras_now)
                rec(idx + 1)
                chosen.pop()
                state.state[:] = snapshot
            rec(idx + 1)

        rec(0)


def solve_exact(g: NetworkGraph, budget: SearchBudget | None = None) -> ExactSolution:
    """Best protection plan for the pre-cut subgraph of g.

    The search is seeded with the greedy planner's result, so the returned
    count never falls below it, budget or not."""
    flow = max_flow(g)
    if flow.value < 1:
        raise ValueError("no source-sink connectivity")
    cut = min_cut(g, flow)
    if cut.edges != sink_side_min_cut(g, flow).edges:
        raise ValueError("minimum cut is not unique")
    sub = build_precut_subgraph(g, cut)
    budget = budget if budget is not None else SearchBudget()
    searcher = _Searcher(sub, budget)
    plan = run_heuristic(g)
    seed_extras = {}
    for x in plan.x_nodes:
        for trace, end in plan.extra_paths:
            if end == x:
                seed_extras[x] = trace
                break
    searcher.seed(plan.routed_paths, plan.x_nodes, seed_extras)
    searcher.run()
    count, delta, _, paths, x_nodes, extras = searcher.best
    routing = CommodityRouting(paths, tuple(p[-1] for p in paths))
    xs = frozenset(x_nodes)
    gh = sub.graph
    protected = tuple(
        bool(frozenset(gh.head(e) for e in p[:-1]) & xs) for p in paths
    )
    return ExactSolution(
        subgraph=sub,
        routing=routing,
        x_nodes=x_nodes,
        extra_paths=extras,
        protected=protected,
        protected_count=count,
        delta=delta,
        objective=gh.num_edges * count + delta,
        exhausted=budget.exhausted,
    )


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple  # ((coef, var), ...)
    sense: str  # "<=", ">=", "="
    rhs: int


@dataclass(frozen=True)
class IlpModel:
    """Integer model over the pre-cut subgraph.

    Nodes are referenced by positional tokens n0, n1, ... (declared in
    node_tokens) so that node ids never collide with the variable grammar.
    """

    h: int
    w: int
    omega: int
    node_tokens: tuple  # ((token, node id), ...)
    d: tuple  # ((token, hops), ...)
    objective: tuple
    constraints: tuple
    binaries: tuple
    integers: tuple

    def to_text(self) -> str:
        lines = [
            f"param h {self.h}",
            f"param w {self.w}",
            f"param omega {self.omega}",
        ]
        for token, node in self.node_tokens:
            lines.append(f"node {token} {node}")
        for token, hops in self.d:
            lines.append(f"param d {token} {hops}")
        lines.append("maximize " + _format_terms(self.objective))
        lines.append("subject to")
        for c in self.constraints:
            lines.append(f"{c.name}: {_format_terms(c.terms)} {c.sense} {c.rhs}")
        lines.append("binary " + " ".join(self.binaries))
        lines.append("integer " + " ".join(self.integers))
        lines.append("end")
        return "\n".join(lines) + "\n"


def _format_terms(terms):
    parts = []
    for i, (coef, var) in enumerate(terms):
        if i == 0:
            parts.append(f"{coef} {var}")
        elif coef < 0:
            parts.append(f"- {-coef} {var}")
        else:
            parts.append(f"+ {coef} {var}")
    return " ".join(parts) if parts else "0"


def emit_model(g: NetworkGraph) -> IlpModel:
    """Integer model whose optimum matches solve_exact's objective.

    One commodity per unit of max-flow routes on the pre-cut subgraph; per
    node a single optional extra unit marks it as a decoding node; a path
    counts as protected when it carries a marked node. The dummy sink and
    the source are pinned to x = 0 so they can never count as protecting.
    """
    flow = max_flow(g)
    if flow.value < 1:
        raise ValueError("no source-sink connectivity")
    cut = min_cut(g, flow)
    if cut.edges != sink_side_min_cut(g, flow).edges:
        raise ValueError("minimum cut is not unique")
    sub = build_precut_subgraph(g, cut)
    gh = sub.graph
    h = flow.value
    w = gh.num_edges
    omega = gh.num_nodes + 1
    tok = {node: f"n{idx}" for idx, node in enumerate(gh.nodes)}
    hops = _hop_distances(gh, gh.source)
    coms = range(1, h + 1)
    eids = range(gh.num_edges)

    constraints = []

    def f(i, e):
        return f"f_{i}_e{e}"

    def gvar(j, e):
        return f"g_{tok[j]}_e{e}"

    out_s = gh.out_edges[gh.source]
    in_s = gh.in_edges[gh.source]
    for i in coms:
        constraints.append(
            Constraint(f"src_out_{i}", tuple((1, f(i, e)) for e in out_s), "=", 1)
        )
        if in_s:
            constraints.append(
                Constraint(f"src_in_{i}", tuple((1, f(i, e)) for e in in_s), "=", 0)
            )
        for v in gh.nodes:
            if v in (gh.source, sub.virtual_sink):
                continue
            terms = [(1, f(i, e)) for e in gh.in_edges[v]]
            terms += [(-1, f(i, e)) for e in gh.out_edges[v]]
            constraints.append(
                Constraint(f"conserve_{i}_{tok[v]}", tuple(terms), "=", 0)
            )
        for v in gh.nodes:
            terms = [(1, f"u_{i}_{tok[v]}")]
            terms += [(-1, f(i, e)) for e in gh.in_edges[v]]
            constraints.append(
                Constraint(f"onpath_{i}_{tok[v]}", tuple(terms), "=", 0)
            )
    for j in gh.nodes:
        constraints.append(
            Constraint(
                f"extra_budget_{tok[j]}",
                tuple((1, gvar(j, e)) for e in out_s),
                "<=",
                1,
            )
        )
        terms = [(1, f"x_{tok[j]}")]
        terms += [(-1, gvar(j, e)) for e in gh.in_edges[j]]
        constraints.append(
            Constraint(f"extra_delivered_{tok[j]}", tuple(terms), "=", 0)
        )
        for v in gh.nodes:
            if v == gh.source or v == j:
                continue
            terms = [(1, gvar(j, e)) for e in gh.in_edges[v]]
            terms += [(-1, gvar(j, e)) for e in gh.out_edges[v]]
            constraints.append(
                Constraint(
                    f"extra_conserve_{tok[j]}_{tok[v]}", tuple(terms), "=", 0
                )
            )
    for e in eids:
        terms = [(1, f(i, e)) for i in coms]
        terms += [(1, gvar(j, e)) for j in gh.nodes]
        constraints.append(Constraint(f"cap_e{e}", tuple(terms), "<=", 1))
    for i in coms:
        for j in gh.nodes:
            constraints.append(
                Constraint(
                    f"protected_node_{i}_{tok[j]}",
                    (
                        (2, f"zeta_{i}_{tok[j]}"),
                        (-1, f"u_{i}_{tok[j]}"),
                        (-1, f"x_{tok[j]}"),
                    ),
                    "<=",
                    0,
                )
            )
        terms = [(1, f"sigma_{i}")]
        terms += [(-1, f"zeta_{i}_{tok[j]}") for j in gh.nodes]
        constraints.append(Constraint(f"protected_path_{i}", tuple(terms), "<=", 0))
    for i in coms:
        for j in gh.nodes:
            constraints.append(
                Constraint(
                    f"depth_{i}_{tok[j]}",
                    (
                        (1, f"delta_{i}_{tok[j]}"),
                        (-hops[j], f"zeta_{i}_{tok[j]}"),
                    ),
                    "=",
                    0,
                )
            )
    constraints.append(
        Constraint("fix_x_source", ((1, f"x_{tok[gh.source]}"),), "=", 0)
    )
    constraints.append(
        Constraint("fix_x_sink", ((1, f"x_{tok[sub.virtual_sink]}"),), "=", 0)
    )

    objective = [(w, f"sigma_{i}") for i in coms]
    objective += [
        (1, f"delta_{i}_{tok[j]}") for i in coms for j in gh.nodes
    ]
    binaries = [f"sigma_{i}" for i in coms]
    binaries += [f(i, e) for i in coms for e in eids]
    binaries += [f"u_{i}_{tok[j]}" for i in coms for j in gh.nodes]
    binaries += [gvar(j, e) for j in gh.nodes for e in eids]
    binaries += [f"x_{tok[j]}" for j in gh.nodes]
    binaries += [f"zeta_{i}_{tok[j]}" for i in coms for j in gh.nodes]
    integers = [f"delta_{i}_{tok[j]}" for i in coms for j in gh.nodes]

    return IlpModel(
        h=h,
        w=w,
        omega=omega,
        node_tokens=tuple((tok[v], v) for v in gh.nodes),
        d=tuple((tok[v], hops[v]) for v in gh.nodes),
        objective=tuple(objective),
        constraints=tuple(constraints),
        binaries=tuple(binaries),
        integers=tuple(integers),
    )


class ModelFormatError(ValueError):
    pass


def _parse_terms(tokens):
    terms = []
    sign = 1
    i = 0
    while i < len(tokens):
        t = tokens[i]
        if t == "+":
            sign = 1
            i += 1
            continue
        if t == "-":
            sign = -1
            i += 1
            continue
        try:
            coef = int(t)
        except ValueError as exc:
            raise ModelFormatError(f"expected coefficient, got {t!r}") from exc
        if i + 1 >= len(tokens):
            raise ModelFormatError("dangling coefficient")
        terms.append((sign * coef, tokens[i + 1]))
        sign = 1
        i += 2
    return tuple(terms)


def parse_model(text: str) -> IlpModel:
    """Parses the emitter's text format back into an IlpModel."""
    h = w = omega = None
    node_tokens = []
    d = []
    objective = None
    constraints = []
    binaries = ()
    integers = ()
    in_constraints = False
    ended = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ended:
            raise ModelFormatError("content after end")
        parts = line.split()
        if parts[0] == "param":
            if parts[1] == "h":
                h = int(parts[2])
            elif parts[1] == "w":
                w = int(parts[2])
            elif parts[1] == "omega":
                omega = int(parts[2])
            elif parts[1] == "d":
                d.append((parts[2], int(parts[3])))
            else:
                raise ModelFormatError(f"unknown param {parts[1]!r}")
        elif parts[0] == "node":
            node_tokens.append((parts[1], parts[2]))
        elif parts[0] == "maximize":
            objective = _parse_terms(parts[1:])
        elif parts[0] == "subject" and parts[1:] == ["to"]:
            in_constraints = True
        elif parts[0] == "binary":
            binaries = tuple(parts[1:])
        elif parts[0] == "integer":
            integers = tuple(parts[1:])
        elif parts[0] == "end":
            ended = True
        elif in_constraints:
            if not parts[0].endswith(":"):
                raise ModelFormatError(f"constraint missing name: {line!r}")
            name = parts[0][:-1]
            body = parts[1:]
            sense_at = None
            for idx, t in enumerate(body):
                if t in ("<=", ">=", "="):
                    sense_at = idx
                    break
            if sense_at is None or sense_at + 2 != len(body):
                raise ModelFormatError(f"malformed constraint: {line!r}")
            constraints.append(
                Constraint(
                    name,
                    _parse_terms(body[:sense_at]),
                    body[sense_at],
                    int(body[sense_at + 1]),
                )
            )
        else:
            raise ModelFormatError(f"unrecognized line: {line!r}")
    if h is None or w is None or omega is None or objective is None or not ended:
        raise ModelFormatError("incomplete model")
    return IlpModel(
        h=h,
        w=w,
        omega=omega,
        node_tokens=tuple(node_tokens),
        d=tuple(d),
        objective=objective,
        constraints=tuple(constraints),
        binaries=binaries,
        integers=integers,
    )


def validate_assignment(model: IlpModel, assignment) -> tuple:
    """Names of violated constraints and domain rules; empty means valid.

    Missing variables count as zero."""

    def val(v):
        return int(assignment.get(v, 0))

    bad = []
    for c in model.constraints:
        total = sum(coef * val(var) for coef, var in c.terms)
        ok = (
            total <= c.rhs
            if c.sense == "<="
            else total >= c.rhs if c.sense == ">=" else total == c.rhs
        )
        if not ok:
            bad.append(c.name)
    for v in model.binaries:
        if val(v) not in (0, 1):
            bad.append(f"domain:{v}")
    for v in model.integers:
        if val(v) < 0:
            bad.append(f"domain:{v}")
    return tuple(bad)


def assignment_for(model: IlpModel, solution: ExactSolution) -> dict:
    """Variable assignment realizing an ExactSolution in the model."""
    gh = solution.subgraph.graph
    tok = {node: token for token, node in model.node_tokens}
    hops = {token: v for token, v in model.d}
    out = {}
    xs = frozenset(solution.x_nodes)
    for i, path in enumerate(solution.routing.paths, start=1):
        nodes_hit = set()
        for e in path:
            out[f"f_{i}_e{e}"] = 1
            nodes_hit.add(gh.head(e))
        for v in nodes_hit:
            out[f"u_{i}_{tok[v]}"] = 1
        interior = {gh.head(e) for e in path[:-1]}
        sigma = 0
        for v in interior & xs:
            out[f"zeta_{i}_{tok[v]}"] = 1
            out[f"delta_{i}_{tok[v]}"] = hops[tok[v]]
            sigma = 1
        out[f"sigma_{i}"] = sigma
    for x, trace in solution.extra_paths:
        out[f"x_{tok[x]}"] = 1
        for e in trace:
            out[f"g_{tok[x]}_e{e}"] = 1
    return out


@dataclass(frozen=True)
class McgReduction:
    """Coverage instance rendered as a protection network.

    set_nodes lists the per-set node ids in declaration order; chains carry
    one parallel lane per element through the nodes of the sets containing
    it. The budget fan (budget_node, one line per group) meters how many
    set nodes can receive an extra unit: the best protected-path count of
    the graph equals the best coverage of the instance.
    """

    graph: NetworkGraph
    set_nodes: tuple
    set_elements: tuple  # frozensets, aligned with set_nodes
    set_group: tuple  # group index per set, aligned with set_nodes
    budget_node: str
    k_star: int


def reduce_mcg(elements, groups, budget: int) -> McgReduction:
    """Builds the gadget graph for a grouped maximum-coverage instance.

    Requires nonempty ground set, budget at least 1, nonempty groups and
    sets, set elements drawn from the ground set, and any two overlapping
    sets to live in the same group (cross-group overlap would let one
    group's budget line pay for another group's set, breaking the
    equivalence). Without at least one budget line the source-out and
    sink-in edge sets tie as minimum cuts and the gadget stops being a
    single-cut instance."""
    elements = list(elements)
    if not elements:
        raise ValueError("empty ground set")
    if len(set(elements)) != len(elements):
        raise ValueError("duplicate ground-set elements")
    if budget < 1:
        raise ValueError("budget must be at least 1")
    groups = [list(group) for group in groups]
    if not groups or any(not group for group in groups):
        raise ValueError("rejects empty groups")
    flat = []
    set_group = []
    for gi, group in enumerate(groups):
        for s in group:
            s = frozenset(s)
            if not s:
                raise ValueError("rejects empty sets")
            if not s <= set(elements):
                raise ValueError("set contains unknown elements")
            flat.append(s)
            set_group.append(gi)
    for a in range(len(flat)):
        for b in range(a + 1, len(flat)):
            if set_group[a] != set_group[b] and flat[a] & flat[b]:
                raise ValueError("overlapping sets must share a group")

    lines = ["source S", "sink T"]
    set_names = [f"q{i}" for i in range(len(flat))]
    for name in set_names:
        lines.append(f"node {name}")
    for ei, el in enumerate(elements):
        stops = [set_names[si] for si in range(len(flat)) if el in flat[si]]
        prev = "S"
        for stop in stops:
            lines.append(f"edge {prev} {stop}")
            prev = stop
        lines.append(f"edge {prev} T")
    k_star = min(budget, len(groups))
    budget_node = "B"
    lines.append(f"node {budget_node}")
    for _ in range(k_star):
        lines.append(f"edge S {budget_node}")
    for gi in range(len(groups)):
        lines.append(f"node G{gi}")
        lines.append(f"edge {budget_node} G{gi}")
    for si, gi in enumerate(set_group):
        lines.append(f"edge G{gi} {set_names[si]}")
    from .graph import parse_graph

    return McgReduction(
        graph=parse_graph("\n".join(lines) + "\n"),
        set_nodes=tuple(set_names),
        set_elements=tuple(flat),
        set_group=tuple(set_group),
        budget_node=budget_node,
        k_star=k_star,
    )
