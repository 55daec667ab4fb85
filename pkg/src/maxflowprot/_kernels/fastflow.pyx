# cython: language_level=3
"""Compiled compute kernels. Mirrors pyflow.py exactly; see that module for
the reference semantics."""

from libc.stdlib cimport malloc, free

BACKEND = "c"


def unit_max_flow(int num_nodes, tails, heads, caps, int source, int sink):
    cdef int m = len(tails)
    cdef int na = 2 * m
    cdef int *arc_to = <int *> malloc(na * sizeof(int))
    cdef int *arc_cap = <int *> malloc(na * sizeof(int))
    cdef int *flow = <int *> malloc(na * sizeof(int))
    cdef int *adj_head = <int *> malloc(num_nodes * sizeof(int))
    cdef int *adj_next = <int *> malloc(na * sizeof(int))
    cdef int *adj_tail = <int *> malloc(num_nodes * sizeof(int))
    cdef int *parent = <int *> malloc(num_nodes * sizeof(int))
    cdef int *queue = <int *> malloc(num_nodes * sizeof(int))
    cdef int i, u, v, a, qh, qt, delta, r, total
    if not (arc_to and arc_cap and flow and adj_head and adj_next
            and adj_tail and parent and queue):
        raise MemoryError()
    try:
        # adjacency as append-order linked lists (head/tail kept so the scan
        # order matches the insertion order used by the Python backend)
        for v in range(num_nodes):
            adj_head[v] = -1
            adj_tail[v] = -1
        for i in range(m):
            arc_to[2 * i] = heads[i]
            arc_cap[2 * i] = caps[i]
            arc_to[2 * i + 1] = tails[i]
            arc_cap[2 * i + 1] = 0
            flow[2 * i] = 0
            flow[2 * i + 1] = 0
        for i in range(na):
            adj_next[i] = -1
        for i in range(m):
            u = tails[i]
            a = 2 * i
            if adj_head[u] == -1:
                adj_head[u] = a
            else:
                adj_next[adj_tail[u]] = a
            adj_tail[u] = a
            u = heads[i]
            a = 2 * i + 1
            if adj_head[u] == -1:
                adj_head[u] = a
            else:
                adj_next[adj_tail[u]] = a
            adj_tail[u] = a
        total = 0
        while True:
            for v in range(num_nodes):
                parent[v] = -1
            parent[source] = -2
            queue[0] = source
            qh = 0
            qt = 1
            while qh < qt and parent[sink] == -1:
                u = queue[qh]
                qh += 1
                a = adj_head[u]
                while a != -1:
                    v = arc_to[a]
                    if parent[v] == -1 and arc_cap[a] - flow[a] > 0:
                        parent[v] = a
                        if v == sink:
                            break
                        queue[qt] = v
                        qt += 1
                    a = adj_next[a]
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
        out = [flow[2 * i] for i in range(m)]
        return total, out
    finally:
        free(arc_to)
        free(arc_cap)
        free(flow)
        free(adj_head)
        free(adj_next)
        free(adj_tail)
        free(parent)
        free(queue)


cdef _residual_bfs(int num_nodes, tails, heads, caps, flows, int start,
                   bint reverse):
    cdef int m = len(tails)
    cdef int *first = <int *> malloc(num_nodes * sizeof(int))
    cdef int *last = <int *> malloc(num_nodes * sizeof(int))
    cdef int *nxt = <int *> malloc(2 * m * sizeof(int))
    cdef int *dest = <int *> malloc(2 * m * sizeof(int))
    cdef int *queue = <int *> malloc(num_nodes * sizeof(int))
    cdef int i, u, v, a, n_arcs, qh, qt
    if not (first and last and nxt and dest and queue):
        raise MemoryError()
    try:
        for v in range(num_nodes):
            first[v] = -1
            last[v] = -1
        n_arcs = 0
        for i in range(m):
            if caps[i] - flows[i] > 0:
                if reverse:
                    u = heads[i]
                    v = tails[i]
                else:
                    u = tails[i]
                    v = heads[i]
                dest[n_arcs] = v
                nxt[n_arcs] = -1
                if first[u] == -1:
                    first[u] = n_arcs
                else:
                    nxt[last[u]] = n_arcs
                last[u] = n_arcs
                n_arcs += 1
            if flows[i] > 0:
                if reverse:
                    u = tails[i]
                    v = heads[i]
                else:
                    u = heads[i]
                    v = tails[i]
                dest[n_arcs] = v
                nxt[n_arcs] = -1
                if first[u] == -1:
                    first[u] = n_arcs
                else:
                    nxt[last[u]] = n_arcs
                last[u] = n_arcs
                n_arcs += 1
        seen = [0] * num_nodes
        seen[start] = 1
        queue[0] = start
        qh = 0
        qt = 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            a = first[u]
            while a != -1:
                v = dest[a]
                if not seen[v]:
                    seen[v] = 1
                    queue[qt] = v
                    qt += 1
                a = nxt[a]
        return seen
    finally:
        free(first)
        free(last)
        free(nxt)
        free(dest)
        free(queue)


def residual_reachable(int num_nodes, tails, heads, caps, flows, int start):
    return _residual_bfs(num_nodes, tails, heads, caps, flows, start, False)


def residual_coreachable(int num_nodes, tails, heads, caps, flows, int target):
    return _residual_bfs(num_nodes, tails, heads, caps, flows, target, True)


def gf_axpy(dst, src, int coef, gflog, gfexp):
    cdef unsigned char[:] d = dst
    cdef const unsigned char[:] s = src
    cdef const int[:] lg = gflog
    cdef const int[:] ex = gfexp
    cdef int i, lc
    cdef unsigned char b
    if coef == 0:
        return
    lc = lg[coef]
    for i in range(d.shape[0]):
        b = s[i]
        if b:
            d[i] ^= <unsigned char> ex[lc + lg[b]]


def gf_scale(buf, int coef, gflog, gfexp):
    cdef unsigned char[:] d = buf
    cdef const int[:] lg = gflog
    cdef const int[:] ex = gfexp
    cdef int i, lc
    cdef unsigned char b
    if coef == 0:
        for i in range(d.shape[0]):
            d[i] = 0
        return
    lc = lg[coef]
    for i in range(d.shape[0]):
        b = d[i]
        if b:
            d[i] = <unsigned char> ex[lc + lg[b]]
