"""Pure-Python compute kernels (fallback backend).

Same call signatures and bit-identical results as the compiled backend in
``fastflow.pyx``: BFS scans arcs in insertion order, so augmenting paths and
the returned per-edge flows match exactly.
"""

from collections import deque

BACKEND = "python"


def unit_max_flow(num_nodes, tails, heads, caps, source, sink):
    """Edmonds-Karp max flow over an integer-capacity edge list.

    Returns (value, flows) where flows[i] is the flow carried by edge i.
    """
    m = len(tails)
    arc_to = [0] * (2 * m)
    arc_cap = [0] * (2 * m)
    adj = [[] for _ in range(num_nodes)]
    for i in range(m):
        arc_to[2 * i] = heads[i]
        arc_cap[2 * i] = caps[i]
        arc_to[2 * i + 1] = tails[i]
        adj[tails[i]].append(2 * i)
        adj[heads[i]].append(2 * i + 1)
    flow = [0] * (2 * m)
    parent = [-1] * num_nodes
    total = 0
    while True:
        for v in range(num_nodes):
            parent[v] = -1
        parent[source] = -2
        q = deque([source])
        while q and parent[sink] == -1:
            u = q.popleft()
            for a in adj[u]:
                v = arc_to[a]
                if parent[v] == -1 and arc_cap[a] - flow[a] > 0:
                    parent[v] = a
                    if v == sink:
                        break
                    q.append(v)
        if parent[sink] == -1:
            break
        delta = -1
        v = sink
        while v != source:
            a = parent[v]
            r = arc_cap[a] - flow[a]
            if delta < 0 or r < delta:
                delta = r
            v = arc_to[a ^ 1]
        v = sink
        while v != source:
            a = parent[v]
            flow[a] += delta
            flow[a ^ 1] -= delta
            v = arc_to[a ^ 1]
        total += delta
    return total, [flow[2 * i] for i in range(m)]


def residual_reachable(num_nodes, tails, heads, caps, flows, start):
    """Nodes reachable from start in the residual graph (list of 0/1)."""
    adj = [[] for _ in range(num_nodes)]
    for i in range(len(tails)):
        if caps[i] - flows[i] > 0:
            adj[tails[i]].append(heads[i])
        if flows[i] > 0:
            adj[heads[i]].append(tails[i])
    seen = [0] * num_nodes
    seen[start] = 1
    q = deque([start])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = 1
                q.append(v)
    return seen


def residual_coreachable(num_nodes, tails, heads, caps, flows, target):
    """Nodes that can reach target in the residual graph (list of 0/1)."""
    radj = [[] for _ in range(num_nodes)]
    for i in range(len(tails)):
        if caps[i] - flows[i] > 0:
            radj[heads[i]].append(tails[i])
        if flows[i] > 0:
            radj[tails[i]].append(heads[i])
    seen = [0] * num_nodes
    seen[target] = 1
    q = deque([target])
    while q:
        u = q.popleft()
        for v in radj[u]:
            if not seen[v]:
                seen[v] = 1
                q.append(v)
    return seen


def gf_axpy(dst, src, coef, gflog, gfexp):
    """dst[i] ^= coef * src[i] over GF(2^8). dst is a bytearray."""
    if coef == 0:
        return
    lc = gflog[coef]
    for i in range(len(dst)):
        s = src[i]
        if s:
            dst[i] ^= gfexp[lc + gflog[s]]


def gf_scale(buf, coef, gflog, gfexp):
    """buf[i] = coef * buf[i] over GF(2^8), in place."""
    if coef == 0:
        for i in range(len(buf)):
            buf[i] = 0
        return
    lc = gflog[coef]
    for i in range(len(buf)):
        s = buf[i]
        if s:
            buf[i] = gfexp[lc + gflog[s]]
