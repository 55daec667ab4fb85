"""Command line front end.

Subcommands map one-to-one onto the library: analyze, plan-precut,
plan-postcut, solve-exact, bench, simulate. Graph files use the text
format of parse_graph; "-" reads from stdin. Domain errors (no
connectivity, ambiguous min cut, malformed input) exit with status 1.
"""

from __future__ import annotations

import argparse
import json
import sys

from .connectivity import connectivity_report
from .exact import SearchBudget, emit_model, solve_exact
from .graph import GraphFormatError, max_flow, min_cut, parse_graph
from .harness import run_comparison, simulate_end_to_end
from .heuristic import run_heuristic
from .postcut import plan_postcut


def _load_graph(path: str):
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return parse_graph(text)


def _solution_doc(sol):
    g = sol.subgraph.graph
    return {
        "source": g.source,
        "sink": sol.subgraph.virtual_sink,
        "paths": [list(p) for p in sol.node_paths()],
        "x": sorted(sol.x_nodes),
        "protected_count": sol.protected_count,
        "delta": sol.delta,
        "objective": sol.objective,
        "exhausted": sol.exhausted,
    }


def _cmd_analyze(args):
    g = _load_graph(args.graph)
    flow = max_flow(g)
    cut = min_cut(g, flow)
    print(f"max-flow: {flow.value}")
    print(
        "min-cut edges: "
        + ", ".join(
            f"{g.tail(e)}->{g.head(e)}" for e in sorted(cut.edges)
        )
    )
    print()
    print("node classification:")
    print(connectivity_report(g).to_csv(), end="")
    print()
    plan = run_heuristic(g, seed=args.seed)
    print("pre-cut plan:")
    print(plan.report())
    print()
    post = plan_postcut(g)
    print("post-cut plan:")
    print(post.summary())
    if post.n:
        print()
        print(post.reach_csv(), end="")
    return 0


def _cmd_plan_precut(args):
    g = _load_graph(args.graph)
    plan = run_heuristic(g, seed=args.seed)
    print(plan.report())
    return 0


def _cmd_plan_postcut(args):
    g = _load_graph(args.graph)
    post = plan_postcut(g)
    print(post.summary())
    if post.n:
        print()
        print(post.reach_csv(), end="")
    return 0


def _cmd_solve_exact(args):
    g = _load_graph(args.graph)
    if args.emit_model:
        print(emit_model(g).to_text(), end="")
        return 0
    budget = None
    if args.budget_nodes or args.budget_seconds:
        budget = SearchBudget(
            max_nodes=args.budget_nodes, max_seconds=args.budget_seconds
        )
    sol = solve_exact(g, budget=budget)
    print(json.dumps(_solution_doc(sol), indent=2))
    return 0


def _cmd_bench(args):
    node_counts = tuple(int(v) for v in args.nodes.split(","))
    result = run_comparison(
        node_counts=node_counts,
        instances=args.instances,
        seed=args.seed,
        budget_nodes=args.budget_nodes,
        budget_seconds=args.budget_seconds,
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(result.csv())
        print(result.summary_text())
    else:
        print(result.csv(), end="")
    return 0


def _cmd_simulate(args):
    g = _load_graph(args.graph)
    stats = simulate_end_to_end(
        g,
        q_pre=args.pre_failures,
        q_post=args.post_failures,
        rounds=args.rounds,
        seed=args.seed,
    )
    print(stats.report())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxflowprot",
        description="Max-flow protection planning for single-cut DAGs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="classification plus both plans")
    p.add_argument("graph")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("plan-precut", help="heuristic pre-cut plan")
    p.add_argument("graph")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_plan_precut)

    p = sub.add_parser("plan-postcut", help="post-cut coding plan")
    p.add_argument("graph")
    p.set_defaults(func=_cmd_plan_postcut)

    p = sub.add_parser("solve-exact", help="optimal pre-cut plan")
    p.add_argument("graph")
    p.add_argument("--emit-model", action="store_true")
    p.add_argument("--budget-nodes", type=int, default=None)
    p.add_argument("--budget-seconds", type=float, default=None)
    p.set_defaults(func=_cmd_solve_exact)

    p = sub.add_parser("bench", help="heuristic-vs-exact sweep")
    p.add_argument("--nodes", default="5,10,15,20,25")
    p.add_argument("--instances", type=int, default=80)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--budget-nodes", type=int, default=None)
    p.add_argument("--budget-seconds", type=float, default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("simulate", help="byte-level failure simulation")
    p.add_argument("graph")
    p.add_argument("--pre-failures", type=int, default=1)
    p.add_argument("--post-failures", type=int, default=1)
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphFormatError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
