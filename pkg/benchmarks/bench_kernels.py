#!/usr/bin/env python3
"""Micro-benchmark for the two kernel backends.

Times unit-capacity max flow on generated instances and the GF(2^8)
buffer primitives on random payloads, once with the pure-Python kernels
and once with the compiled extension, and prints a speedup table. Both
backends are checked for identical flow values while timing.

Usage:
    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 10,25,50 --instances 30
"""

import argparse
import importlib
import random
import time

from maxflowprot.coding import GF_EXP, GF_LOG
from maxflowprot.generator import GeneratorConfig, generate_instance


def load_backends():
    out = {}
    for name in ("pyflow", "fastflow"):
        try:
            out[name] = importlib.import_module(f"maxflowprot._kernels.{name}")
        except ImportError:
            pass
    return out


def flow_jobs(sizes, instances):
    jobs = []
    for v in sizes:
        batch = []
        for i in range(instances):
            g = generate_instance(
                GeneratorConfig(node_count=v, seed=1000 * v + i)
            )
            index = {name: k for k, name in enumerate(g.nodes)}
            batch.append(
                (
                    g.num_nodes,
                    [index[t] for t, _ in g.edges],
                    [index[h] for _, h in g.edges],
                    [1] * g.num_edges,
                    index[g.source],
                    index[g.sink],
                )
            )
        jobs.append((v, batch))
    return jobs


def time_flow(mod, batch, repeats):
    best = None
    values = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        values = [mod.unit_max_flow(*job)[0] for job in batch]
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, values


def time_gf(mod, size, repeats):
    rng = random.Random(99)
    src = bytes(rng.randrange(256) for _ in range(size))
    best = None
    for _ in range(repeats):
        dst = bytearray(size)
        t0 = time.perf_counter()
        mod.gf_axpy(dst, src, 0x57, GF_LOG, GF_EXP)
        mod.gf_scale(dst, 0x8E, GF_LOG, GF_EXP)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="10,25,50")
    parser.add_argument("--instances", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--buffer-kib", type=int, default=256)
    args = parser.parse_args()

    backends = load_backends()
    if "fastflow" not in backends:
        print("compiled extension not built; timing the Python kernels only")
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"max flow, {args.instances} instances per size, best of {args.repeats}")
    header = f"{'V':>4}  " + "".join(f"{name:>12}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for v, batch in flow_jobs(sizes, args.instances):
        times = {}
        flows = {}
        for name, mod in backends.items():
            times[name], flows[name] = time_flow(mod, batch, args.repeats)
        if len(flows) == 2 and flows["pyflow"] != flows["fastflow"]:
            raise SystemExit("backends disagree on flow values")
        row = f"{v:>4}  " + "".join(
            f"{times[name] * 1e3:>10.2f}ms" for name in backends
        )
        if len(backends) == 2:
            row += f"{times['pyflow'] / times['fastflow']:>9.1f}x"
        print(row)

    size = args.buffer_kib * 1024
    print(f"\nGF(2^8) axpy+scale over a {args.buffer_kib} KiB buffer")
    for name, mod in backends.items():
        dt = time_gf(mod, size, args.repeats)
        rate = 2 * size / dt / 1e6
        print(f"  {name:>8}: {dt * 1e3:8.2f}ms  ({rate:8.1f} MB/s)")
    if len(backends) == 2:
        py = time_gf(backends["pyflow"], size, args.repeats)
        c = time_gf(backends["fastflow"], size, args.repeats)
        print(f"  speedup: {py / c:.1f}x")


if __name__ == "__main__":
    main()
