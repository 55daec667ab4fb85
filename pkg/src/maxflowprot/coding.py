"""Finite-field coding for decoding nodes.

Arithmetic is over GF(2^8) with the reducing polynomial x^8+x^4+x^3+x^2+1.
Generator matrices come from Cauchy constructions brought to systematic
form, so the first k combinations are the plain data units and any k of
the k+e delivered combinations recover the originals.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

from . import _kernels

POLY = 0x11D
FIELD = 256

GF_EXP = array("i", [0]) * 510
GF_LOG = array("i", [0]) * 256


def _fill_tables():
    x = 1
    for i in range(255):
        GF_EXP[i] = x
        GF_LOG[x] = i
        x <<= 1
        if x & 0x100:
            x ^= POLY
    for i in range(255, 510):
        GF_EXP[i] = GF_EXP[i - 255]


_fill_tables()


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return GF_EXP[GF_LOG[a] + GF_LOG[b]]


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    return GF_EXP[255 - GF_LOG[a]]


@dataclass(frozen=True)
class CodingMatrix:
    """k x n generator matrix; column j is the coding vector of
    combination j."""

    k: int
    n: int
    rows: tuple
    flavor: str

    def column(self, j):
        return tuple(self.rows[i][j] for i in range(self.k))


def cauchy_matrix(k: int, n: int) -> CodingMatrix:
    """Cauchy matrix with x_i = i and y_j = k + j.

    Every square submatrix of a Cauchy matrix is invertible, which is the
    property that makes any k received combinations decodable."""
    if k < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    if k + n > FIELD:
        raise ValueError("k + n exceeds the field size")
    rows = tuple(
        tuple(gf_inv(i ^ (k + j)) for j in range(n)) for i in range(k)
    )
    return CodingMatrix(k, n, rows, "cauchy")


def systematic_transform(m: CodingMatrix) -> CodingMatrix:
    """Left-multiplies by the inverse of the leading k x k block, giving
    (I | P). Column spaces of all k-subsets are preserved, so the any-k
    decodability survives the transform."""
    k, n = m.k, m.n
    aug = [list(m.rows[i]) + [1 if j == i else 0 for j in range(k)] for i in range(k)]
    for col in range(k):
        pivot = next((r for r in range(col, k) if aug[r][col]), None)
        if pivot is None:
            raise ValueError("leading block is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = gf_inv(aug[col][col])
        aug[col] = [gf_mul(inv, v) for v in aug[col]]
        for r in range(k):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [
                    aug[r][j] ^ gf_mul(factor, aug[col][j])
                    for j in range(n + k)
                ]
    inverse = [row[n:] for row in aug]
    rows = []
    for i in range(k):
        rows.append(
            tuple(
                _dot(inverse[i], [m.rows[r][j] for r in range(k)])
                for j in range(n)
            )
        )
    return CodingMatrix(k, n, tuple(rows), "systematic")


def _dot(a, b):
    acc = 0
    for x, y in zip(a, b):
        acc ^= gf_mul(x, y)
    return acc


def matrix_for(k: int, e: int) -> CodingMatrix:
    """Generator for k data units and e extra combinations.

    No redundancy means the identity; a single data unit is duplicated; a
    single extra is the XOR parity column; the general case is a
    systematic Cauchy matrix."""
    if k < 1 or e < 0:
        raise ValueError("need k >= 1 and e >= 0")
    n = k + e
    if e == 0:
        rows = tuple(
            tuple(1 if j == i else 0 for j in range(n)) for i in range(k)
        )
        return CodingMatrix(k, n, rows, "systematic")
    if k == 1:
        return CodingMatrix(1, n, ((1,) * n,), "systematic")
    if e == 1:
        rows = tuple(
            tuple(1 if j == i or j == k else 0 for j in range(n))
            for i in range(k)
        )
        return CodingMatrix(k, n, rows, "systematic")
    return systematic_transform(cauchy_matrix(k, n))


def encode(m: CodingMatrix, blocks) -> list:
    """blocks: k equal-length byte buffers -> n combination buffers."""
    blocks = [bytes(b) for b in blocks]
    if len(blocks) != m.k:
        raise ValueError("expected one block per data unit")
    if len({len(b) for b in blocks}) > 1:
        raise ValueError("blocks must have equal length")
    size = len(blocks[0]) if blocks else 0
    out = []
    for j in range(m.n):
        buf = bytearray(size)
        for i in range(m.k):
            _kernels.gf_axpy(buf, blocks[i], m.rows[i][j], GF_LOG, GF_EXP)
        out.append(bytes(buf))
    return out


def decode(m: CodingMatrix, shares) -> list:
    """shares: (column index, buffer) pairs, any k of the n columns.

    Solves the k x k system by Gaussian elimination over the byte
    buffers and returns the original data blocks."""
    shares = [(int(j), bytearray(buf)) for j, buf in shares]
    if len(shares) < m.k:
        raise ValueError("not enough combinations to decode")
    shares = shares[: m.k]
    cols = [j for j, _ in shares]
    if len(set(cols)) != len(cols):
        raise ValueError("duplicate combination indices")
    if any(j < 0 or j >= m.n for j in cols):
        raise ValueError("combination index out of range")
    k = m.k
    a = [[m.rows[i][j] for i in range(k)] for j, _ in shares]
    rhs = [buf for _, buf in shares]
    for col in range(k):
        pivot = next((r for r in range(col, k) if a[r][col]), None)
        if pivot is None:
            raise ValueError("combinations are not independent")
        a[col], a[pivot] = a[pivot], a[col]
        rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
        inv = gf_inv(a[col][col])
        a[col] = [gf_mul(inv, v) for v in a[col]]
        _kernels.gf_scale(rhs[col], inv, GF_LOG, GF_EXP)
        for r in range(k):
            if r != col and a[r][col]:
                factor = a[r][col]
                a[r] = [
                    a[r][j] ^ gf_mul(factor, a[col][j]) for j in range(k)
                ]
                _kernels.gf_axpy(rhs[r], bytes(rhs[col]), factor, GF_LOG, GF_EXP)
    return [bytes(b) for b in rhs]


def dump_matrix(m: CodingMatrix) -> str:
    lines = [f"{m.k} {m.n} {m.flavor}"]
    for row in m.rows:
        lines.append(" ".join(f"{v:02x}" for v in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> CodingMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix dump")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError("malformed matrix header")
    k, n, flavor = int(head[0]), int(head[1]), head[2]
    rows = []
    for ln in lines[1:]:
        rows.append(tuple(int(v, 16) for v in ln.split()))
    if len(rows) != k or any(len(r) != n for r in rows):
        raise ValueError("matrix body does not match header")
    return CodingMatrix(k, n, tuple(rows), flavor)


@dataclass(frozen=True)
class VectorSlot:
    """One delivery path into a decoding node: the path's edges, the
    upstream neighbor handing over the data, and the assigned column."""

    path: tuple
    neighbor: str
    column: int
    coefficients: tuple


@dataclass(frozen=True)
class NodeCode:
    node: str
    data_units: int
    combinations: int
    matrix: CodingMatrix
    slots: tuple


@dataclass(frozen=True)
class CodeAssignment:
    per_node: tuple

    def for_node(self, node):
        for nc in self.per_node:
            if nc.node == node:
                return nc
        raise KeyError(node)


def assign_precut_vectors(plan) -> CodeAssignment:
    """Columns for every decoding node of a pre-cut plan.

    The k slots continuing toward the sink carry the systematic identity
    columns, so forwarded traffic stays uncoded; the extra slots carry the
    redundancy columns. Slot order follows plan.in_paths: routed-path
    prefixes first, absorbed extras after them."""
    g = plan.subgraph.graph
    nodes = []
    for x in plan.x_nodes:
        k = plan.flow_t[x]
        n = plan.flow_s[x]
        in_paths = plan.in_paths(x)
        if len(in_paths) != n:
            raise ValueError(
                f"node {x}: {len(in_paths)} delivery paths for {n} units"
            )
        m = matrix_for(k, n - k)
        slots = []
        for col, path in enumerate(in_paths):
            slots.append(
                VectorSlot(
                    path=tuple(path),
                    neighbor=g.tail(path[-1]),
                    column=col,
                    coefficients=m.column(col),
                )
            )
        nodes.append(
            NodeCode(
                node=x,
                data_units=k,
                combinations=n,
                matrix=m,
                slots=tuple(slots),
            )
        )
    return CodeAssignment(tuple(nodes))
