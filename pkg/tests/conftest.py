"""Shared fixture graphs.

Every expected number asserted against these fixtures (flow values, cut
edges, protection counts, coding parameters) was derived by hand from
the edge lists below, so the tests act as independent pins rather than
snapshots of the implementation.
"""

import pytest

from maxflowprot.connectivity import PreCutSubgraph
from maxflowprot.graph import NetworkGraph


def make_graph(edge_text: str, source="S", sink="T") -> NetworkGraph:
    """Builds a graph from "tail head" pairs separated by commas."""
    edges = []
    order = []
    for part in edge_text.split(","):
        t, h = part.split()
        edges.append((t, h))
        for v in (t, h):
            if v not in order:
                order.append(v)
    return NetworkGraph(order, edges, source, sink)


@pytest.fixture
def double_fan():
    """h = 2, unique cut {A->T, C->T}; both paths can be protected but a
    greedy pass is tempted to spend everything on one side."""
    return make_graph("S A,S B,S B,S C,A T,B A,B C,C T")


@pytest.fixture
def layered_mesh():
    """13 nodes, h = 4, unique cut {F->H, G->T, I->T, J->T}. One unit
    (at H) is protectable after the cut over n = 2 routes."""
    return make_graph(
        "S A,S B,S C,S D,S F,A E,B F,C F,D I,E G,E J,F E,F G,F H,F I,"
        "G J,G T,H K,H T,I T,J T,K T"
    )


@pytest.fixture
def diamond_ladder():
    """Pre-cut-shaped graph (dummy sink in place, h = 2). Its min cut is
    not unique, so it drives the planner phases directly."""
    return make_graph(
        "S A,S B,S C,B A,A D,D E,E F,C F,B E,F T',D T'", sink="T'"
    )


@pytest.fixture
def diamond_ladder_sub(diamond_ladder):
    g = diamond_ladder
    return PreCutSubgraph(
        graph=g,
        virtual_sink="T'",
        f_s=frozenset({"D", "F"}),
        edge_map=tuple(range(g.num_edges)),
    )


@pytest.fixture
def split_reach_postcut():
    """h = 4 with cut {p_i -> letter}; the 4 units reach the sink over
    n = 6 routes (e = 2) with a split reachability pattern: P1-P3 see
    only A and B, P5-P6 only C and D, P4 everyone."""
    parts = []
    for i in range(1, 5):
        parts += [f"S p{i}", f"S p{i}"]
    parts += ["p1 A", "p2 B", "p3 C", "p4 D"]
    for x in ("A", "B"):
        parts += [f"{x} P{j}" for j in range(1, 5)]
    for x in ("C", "D"):
        parts += [f"{x} P{j}" for j in range(4, 7)]
    parts += [f"P{j} T" for j in range(1, 7)]
    return make_graph(",".join(parts))


@pytest.fixture
def branch_merge():
    """h = 2, cut {a1->b1, a2->b2}; units b1 and b2 share the spare
    route through their merge node, so m = 2, n = 3, e = 1."""
    return make_graph(
        "S a1,S a1,S a2,S a2,a1 b1,a2 b2,b1 T,b1 m,b2 T,b2 m,m T"
    )
