"""Kernel behavior and backend parity.

The compiled and pure backends must agree bit for bit: same flow values,
same per-edge flows, same reachability vectors, same byte regions.
"""

import random

import pytest

from bruteforce import slow_mul
from maxflowprot import _kernels
from maxflowprot._kernels import pyflow
from maxflowprot.coding import GF_EXP, GF_LOG

fastflow = pytest.importorskip("maxflowprot._kernels.fastflow")


def random_net(rng, max_nodes=8, max_edges=16):
    n = rng.randrange(2, max_nodes + 1)
    m = rng.randrange(1, max_edges + 1)
    tails = [rng.randrange(n) for _ in range(m)]
    heads = [rng.randrange(n) for _ in range(m)]
    caps = [rng.choice((0, 1, 1, 1, 2, 3)) for _ in range(m)]
    return n, tails, heads, caps


def check_flow(n, tails, heads, caps, s, t, value, flows):
    assert len(flows) == len(tails)
    excess = [0] * n
    for i, f in enumerate(flows):
        assert 0 <= f <= caps[i]
        excess[tails[i]] -= f
        excess[heads[i]] += f
    for v in range(n):
        if v == s:
            assert excess[v] == -value
        elif v == t:
            assert excess[v] == value
        else:
            assert excess[v] == 0


def test_unit_max_flow_known_values():
    # single edge
    assert pyflow.unit_max_flow(2, [0], [1], [1], 0, 1)[0] == 1
    # parallel edges add up
    assert pyflow.unit_max_flow(2, [0, 0], [1, 1], [1, 1], 0, 1)[0] == 2
    # diamond: two disjoint routes
    value, flows = pyflow.unit_max_flow(
        4, [0, 0, 1, 2], [1, 2, 3, 3], [1, 1, 1, 1], 0, 3
    )
    assert value == 2
    assert flows == [1, 1, 1, 1]
    # middle bottleneck
    assert pyflow.unit_max_flow(
        4, [0, 0, 1, 1, 2], [1, 1, 2, 2, 3], [1, 1, 1, 1, 1], 0, 3
    )[0] == 1


def test_unit_max_flow_requires_cancellation():
    # the straight-through greedy route must be partially undone
    tails = [0, 1, 1, 2, 2, 3]
    heads = [1, 2, 3, 3, 4, 4]
    caps = [2, 1, 1, 1, 1, 1]
    for impl in (pyflow, fastflow):
        value, flows = impl.unit_max_flow(5, tails, heads, caps, 0, 4)
        assert value == 2
        check_flow(5, tails, heads, caps, 0, 4, value, flows)


def test_backend_parity_max_flow():
    rng = random.Random(1)
    for _ in range(400):
        n, tails, heads, caps = random_net(rng)
        s, t = 0, n - 1
        vp, fp = pyflow.unit_max_flow(n, tails, heads, caps, s, t)
        vc, fc = fastflow.unit_max_flow(n, tails, heads, caps, s, t)
        assert vp == vc
        assert list(fp) == list(fc)
        check_flow(n, tails, heads, caps, s, t, vp, fp)


def test_backend_parity_reachability():
    rng = random.Random(2)
    for _ in range(200):
        n, tails, heads, caps = random_net(rng)
        _, flows = pyflow.unit_max_flow(n, tails, heads, caps, 0, n - 1)
        rp = pyflow.residual_reachable(n, tails, heads, caps, flows, 0)
        rc = fastflow.residual_reachable(n, tails, heads, caps, flows, 0)
        assert list(rp) == list(rc)
        cp = pyflow.residual_coreachable(n, tails, heads, caps, flows, n - 1)
        cc = fastflow.residual_coreachable(n, tails, heads, caps, flows, n - 1)
        assert list(cp) == list(cc)
        # after a max flow the sink is unreachable from the source
        assert rp[n - 1] == 0


def test_min_cut_separates_max_flow_sides():
    # reachable and coreachable sides never overlap after a max flow
    rng = random.Random(3)
    for _ in range(100):
        n, tails, heads, caps = random_net(rng)
        _, flows = pyflow.unit_max_flow(n, tails, heads, caps, 0, n - 1)
        fwd = pyflow.residual_reachable(n, tails, heads, caps, flows, 0)
        bwd = pyflow.residual_coreachable(n, tails, heads, caps, flows, n - 1)
        assert all(not (a and b) for a, b in zip(fwd, bwd))


def test_gf_axpy_matches_slow_multiplier():
    rng = random.Random(4)
    for _ in range(150):
        size = rng.randrange(1, 48)
        src = bytes(rng.randrange(256) for _ in range(size))
        base = bytes(rng.randrange(256) for _ in range(size))
        coef = rng.randrange(256)
        a = bytearray(base)
        b = bytearray(base)
        pyflow.gf_axpy(a, src, coef, GF_LOG, GF_EXP)
        fastflow.gf_axpy(b, src, coef, GF_LOG, GF_EXP)
        expect = bytes(d ^ slow_mul(coef, s) for d, s in zip(base, src))
        assert bytes(a) == expect
        assert a == b


def test_gf_scale_matches_slow_multiplier():
    rng = random.Random(5)
    for _ in range(150):
        size = rng.randrange(1, 48)
        base = bytes(rng.randrange(256) for _ in range(size))
        coef = rng.randrange(256)
        a = bytearray(base)
        b = bytearray(base)
        pyflow.gf_scale(a, coef, GF_LOG, GF_EXP)
        fastflow.gf_scale(b, coef, GF_LOG, GF_EXP)
        expect = bytes(slow_mul(coef, s) for s in base)
        assert bytes(a) == expect
        assert a == b


def test_gf_axpy_zero_coefficient_is_noop():
    buf = bytearray(b"\x01\x02\x03")
    pyflow.gf_axpy(buf, b"\xff\xff\xff", 0, GF_LOG, GF_EXP)
    assert buf == bytearray(b"\x01\x02\x03")
    fastflow.gf_axpy(buf, b"\xff\xff\xff", 0, GF_LOG, GF_EXP)
    assert buf == bytearray(b"\x01\x02\x03")


def test_active_backend_is_one_of_the_twins():
    assert _kernels.backend_name() in ("c", "python")
    assert _kernels.BACKEND == _kernels.backend_name()
