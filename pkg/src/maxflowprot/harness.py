"""Experiment drivers: heuristic-vs-exact comparison sweeps and a
byte-level end-to-end failure simulation."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from . import _kernels
from .coding import GF_EXP, GF_LOG, assign_precut_vectors, decode, gf_inv, gf_mul
from .exact import SearchBudget, solve_exact
from .graph import NetworkGraph, max_flow
from .generator import GeneratorConfig, generate_instance
from .heuristic import run_heuristic
from .postcut import plan_postcut


@dataclass(frozen=True)
class ExperimentRecord:
    instance: str
    v: int
    h: int
    heuristic_protected: int
    exact_protected: int
    heuristic_ms: float
    exact_ms: float
    exhausted: bool


CSV_HEADER = "instance,V,h,heuristic_protected,exact_protected,heuristic_ms,exact_ms"


@dataclass(frozen=True)
class ComparisonResult:
    records: tuple

    def csv(self) -> str:
        rows = [CSV_HEADER]
        for r in self.records:
            rows.append(
                f"{r.instance},{r.v},{r.h},{r.heuristic_protected},"
                f"{r.exact_protected},{r.heuristic_ms:.3f},{r.exact_ms:.3f}"
            )
        return "\n".join(rows) + "\n"

    def node_counts(self):
        return tuple(sorted({r.v for r in self.records}))

    def triples(self, v):
        """(max-flow, heuristic count, exact count) per solved instance."""
        return [
            (r.h, r.heuristic_protected, r.exact_protected)
            for r in self.records
            if r.v == v and not r.exhausted
        ]

    def mean_ratio(self, v) -> float:
        """Mean per-instance heuristic/exact ratio. Instances where the
        optimum protects nothing count as 1.0; budget-exhausted instances
        are left out."""
        ratios = [
            r.heuristic_protected / r.exact_protected if r.exact_protected else 1.0
            for r in self.records
            if r.v == v and not r.exhausted
        ]
        if not ratios:
            return 1.0
        return sum(ratios) / len(ratios)

    def exhausted_count(self, v=None) -> int:
        return sum(1 for r in self.records if r.exhausted and v in (None, r.v))

    def summary_text(self) -> str:
        lines = ["V  instances  exhausted  mean_ratio  heur_sum  exact_sum"]
        for v in self.node_counts():
            solved = self.triples(v)
            hs = sum(t[1] for t in solved)
            es = sum(t[2] for t in solved)
            lines.append(
                f"{v:<2d} {len(solved) + self.exhausted_count(v):>9d}"
                f"  {self.exhausted_count(v):>9d}  {self.mean_ratio(v):>10.3f}"
                f"  {hs:>8d}  {es:>9d}"
            )
        overall = [self.mean_ratio(v) for v in self.node_counts()]
        if overall:
            lines.append(f"grand mean ratio: {sum(overall) / len(overall):.3f}")
        return "\n".join(lines)


def run_comparison(
    node_counts=(5, 10, 15, 20, 25),
    instances: int = 80,
    seed: int = 0,
    edge_prob=None,
    budget_nodes=None,
    budget_seconds=None,
    progress=None,
) -> ComparisonResult:
    """The heuristic-vs-exact sweep. Instance i at size V is generated
    with seed = seed + 1000*V + i, so every field except the timings is
    reproducible."""
    records = []
    for v in node_counts:
        for i in range(instances):
            cfg = GeneratorConfig(
                node_count=v, edge_prob=edge_prob, seed=seed + 1000 * v + i
            )
            g = generate_instance(cfg)
            h = max_flow(g).value
            t0 = time.perf_counter()
            plan = run_heuristic(g)
            t1 = time.perf_counter()
            budget = None
            if budget_nodes or budget_seconds:
                budget = SearchBudget(
                    max_nodes=budget_nodes, max_seconds=budget_seconds
                )
            sol = solve_exact(g, budget=budget)
            t2 = time.perf_counter()
            rec = ExperimentRecord(
                instance=f"V{v}-{i:03d}",
                v=v,
                h=h,
                heuristic_protected=plan.protected_count,
                exact_protected=sol.protected_count,
                heuristic_ms=(t1 - t0) * 1e3,
                exact_ms=(t2 - t1) * 1e3,
                exhausted=sol.exhausted,
            )
            if not rec.exhausted and rec.heuristic_protected > rec.exact_protected:
                raise AssertionError(
                    f"heuristic beat the exact solver on {rec.instance}"
                )
            records.append(rec)
            if progress:
                progress(rec)
    return ComparisonResult(tuple(records))


def _axpy(dst: bytearray, src, coef: int):
    if coef:
        _kernels.gf_axpy(dst, src, coef, GF_LOG, GF_EXP)


def _scale(buf: bytearray, coef: int):
    _kernels.gf_scale(buf, coef, GF_LOG, GF_EXP)


def _solve_bytes(vectors, buffers, width):
    """Gauss-Jordan over [vectors | buffers]; returns {unit index: bytes}
    for every unit whose basis vector survives in reduced form."""
    reduced = []
    for vec, buf in zip(vectors, buffers):
        vec = list(vec)
        buf = bytearray(buf)
        for pivot, pvec, pbuf in reduced:
            factor = vec[pivot]
            if factor:
                for j in range(width):
                    vec[j] ^= gf_mul(factor, pvec[j])
                _axpy(buf, pbuf, factor)
        lead = next((j for j, a in enumerate(vec) if a), None)
        if lead is None:
            continue
        inv = gf_inv(vec[lead])
        vec = [gf_mul(inv, a) for a in vec]
        _scale(buf, inv)
        for _, pvec, pbuf in reduced:
            factor = pvec[lead]
            if factor:
                for j in range(width):
                    pvec[j] ^= gf_mul(factor, vec[j])
                _axpy(pbuf, buf, factor)
        reduced.append((lead, vec, buf))
    out = {}
    for pivot, vec, buf in reduced:
        if sum(1 for a in vec if a) == 1 and vec[pivot] == 1:
            out[pivot] = bytes(buf)
    return out


@dataclass(frozen=True)
class DeliveryStats:
    rounds: int
    units: tuple
    delivered: tuple

    def rate(self, i) -> float:
        return self.delivered[i] / self.rounds

    def overall_rate(self) -> float:
        if not self.units:
            return 1.0
        return sum(self.delivered) / (self.rounds * len(self.units))

    def report(self) -> str:
        lines = [f"rounds: {self.rounds}"]
        for i, label in enumerate(self.units):
            lines.append(f"unit {i} ({label}): {self.rate(i):.3f}")
        lines.append(f"overall: {self.overall_rate():.3f}")
        return "\n".join(lines)


class _PreCutCoder:
    """Per-decoding-node wiring resolved once: which routed path owns
    each systematic slot and how extra shares are built from payloads."""

    def __init__(self, plan):
        self.plan = plan
        self.paths = plan.routed_paths
        self.codes = {nc.node: nc for nc in assign_precut_vectors(plan).per_node}
        self.prefix_slots = {}
        self.extra_slots = {}
        self.heal_points = {i: {} for i in range(len(self.paths))}
        for node, nc in self.codes.items():
            prefixes = []
            extras = []
            for slot in nc.slots:
                if slot.column < nc.data_units:
                    owner = self._owner(slot.path)
                    prefixes.append((slot.column, owner, len(slot.path)))
                    self.heal_points[owner][len(slot.path)] = node
                else:
                    extras.append(slot)
            self.prefix_slots[node] = prefixes
            self.extra_slots[node] = extras

    def _owner(self, prefix):
        for i, path in enumerate(self.paths):
            if tuple(path[: len(prefix)]) == prefix:
                return i
        raise KeyError(prefix)


def simulate_end_to_end(
    g: NetworkGraph,
    q_pre: int = 1,
    q_post: int = 1,
    rounds: int = 100,
    seed: int = 0,
    payload_size: int = 32,
) -> DeliveryStats:
    """Random payloads each round, random failures on the two sides of
    the cut (never on the cut edges themselves), actual byte movement
    through both coding layers, and per-unit delivery rates at the sink.

    A payload counts as delivered only when the bytes arriving at the
    sink equal the bytes that left the source."""
    pre_plan = run_heuristic(g)
    post_plan = plan_postcut(g)
    coder = _PreCutCoder(pre_plan)
    sub = pre_plan.subgraph
    to_g = sub.edge_map

    pre_pool = sorted(
        to_g[eid]
        for eid in range(sub.graph.num_edges)
        if sub.graph.head(eid) != sub.virtual_sink
    )
    post_pool = sorted(post_plan.postcut_edges)

    paths = pre_plan.routed_paths
    n_units = len(paths)
    unit_cut_edge = [to_g[p[-1]] for p in paths]
    unit_heads = [g.head(ce) for ce in unit_cut_edge]
    non_sink_heads = [u for u in unit_heads if u != g.sink]
    if len(set(non_sink_heads)) != len(non_sink_heads):
        raise ValueError("cut edges sharing a head node are not supported")

    rng = random.Random(seed)
    delivered = [0] * n_units

    for _ in range(rounds):
        payloads = [
            bytes(rng.randrange(256) for _ in range(payload_size))
            for _ in range(n_units)
        ]
        failed_pre = set(
            rng.sample(pre_pool, min(q_pre, len(pre_pool))) if q_pre > 0 else ()
        )
        failed_post = set(
            rng.sample(post_pool, min(q_post, len(post_pool))) if q_post > 0 else ()
        )
        share_memo = {}

        def walk(i, upto):
            """Unit i's payload after traversing the first upto edges of
            its path, or None when it is lost. A decoding node passed on
            the way regenerates the unit when enough shares reach it."""
            buf = payloads[i]
            heals = coder.heal_points[i]
            for pos in range(upto):
                x = heals.get(pos)
                if x is not None:
                    healed = decode_at(x)
                    if healed is not None:
                        buf = healed[i]
                if to_g[paths[i][pos]] in failed_pre:
                    buf = None
            return buf

        def decode_at(x):
            """{unit: bytes} for x's through units when enough shares
            survive at x, else None."""
            if x in share_memo:
                return share_memo[x]
            nc = coder.codes[x]
            shares = []
            owners = {}
            for column, owner, plen in coder.prefix_slots[x]:
                owners[column] = owner
                buf = walk(owner, plen)
                if buf is not None:
                    shares.append((column, buf))
            for slot in coder.extra_slots[x]:
                if any(to_g[eid] in failed_pre for eid in slot.path):
                    continue
                buf = bytearray(payload_size)
                for row in range(nc.data_units):
                    _axpy(buf, payloads[owners[row]], slot.coefficients[row])
                shares.append((slot.column, bytes(buf)))
            if len(shares) >= nc.data_units:
                blocks = decode(nc.matrix, shares[: nc.data_units])
                result = {owners[r]: blocks[r] for r in range(nc.data_units)}
            else:
                result = None
            share_memo[x] = result
            return result

        across = {}
        for i in range(n_units):
            buf = walk(i, len(paths[i]))
            if buf is not None:
                across[i] = buf

        for i, head in enumerate(unit_heads):
            if head == g.sink and i in across and across[i] == payloads[i]:
                delivered[i] += 1

        if post_plan.m:
            unit_row = {u: j for j, u in enumerate(post_plan.f_t_prime)}
            arrived = {
                unit_row[unit_heads[i]]: across[i]
                for i in across
                if unit_heads[i] != g.sink
            }
            vectors = []
            buffers = []
            for ci in range(post_plan.n):
                if failed_post.intersection(post_plan.paths[ci]):
                    continue
                col = post_plan.matrix.column(ci)
                feed = set(post_plan.reach[ci])
                vec = [0] * post_plan.m
                buf = bytearray(payload_size)
                for j, unit in enumerate(post_plan.f_t_prime):
                    if unit in feed and j in arrived:
                        vec[j] = col[j]
                        _axpy(buf, arrived[j], col[j])
                vectors.append(vec)
                buffers.append(bytes(buf))
            solved = _solve_bytes(vectors, buffers, post_plan.m)
            for i in range(n_units):
                if unit_heads[i] == g.sink:
                    continue
                row = unit_row[unit_heads[i]]
                if row in solved and solved[row] == payloads[i]:
                    delivered[i] += 1

    labels = tuple(
        f"{g.tail(e)}->{g.head(e)}" for e in unit_cut_edge
    )
    return DeliveryStats(rounds=rounds, units=labels, delivered=tuple(delivered))
