#!/usr/bin/env python3
"""Generate a hierarchical ISP-style router topology in the c3po topology format.

Three tiers: a core ring with chords, an aggregation tier homed on two
adjacent core routers, and an access tier. Most access routers are single-homed
leaves and get one client each; the rest are dual-homed. The server hangs off
core router c0. Output is deterministic for a given seed.

    tools/gen_isp_topology.py > scenarios/topologies/isp79.topo
"""

import argparse
import random
import sys


def build(seed, core, agg, access, dual_homed, agg_links, cpu, mem):
    rng = random.Random(seed)
    edges = []  # (a, b, delay_ms)

    cores = [f"c{i}" for i in range(core)]
    aggs = [f"a{i}" for i in range(agg)]
    accs = [f"e{i}" for i in range(access)]

    for i in range(core):
        edges.append((cores[i], cores[(i + 1) % core], 2))
    for i in range(core // 2):
        edges.append((cores[i], cores[i + core // 2], 3))

    for i, a in enumerate(aggs):
        home = i % core
        edges.append((a, cores[home], 1))
        edges.append((a, cores[(home + 1) % core], 1))

    seen = set()
    while len(seen) < agg_links:
        x, y = rng.sample(range(agg), 2)
        key = (min(x, y), max(x, y))
        if key in seen:
            continue
        seen.add(key)
        edges.append((aggs[key[0]], aggs[key[1]], 1))

    leaves = []
    dual = set(rng.sample(range(access), dual_homed))
    for i, e in enumerate(accs):
        first = i % agg
        edges.append((e, aggs[first], 1))
        if i in dual:
            second = (first + 1 + rng.randrange(agg - 1)) % agg
            edges.append((e, aggs[second], 1))
        else:
            leaves.append(e)

    out = [f"# ISP-style topology: {core} core, {agg} aggregation, {access} access routers",
           f"# generated by tools/gen_isp_topology.py --seed {seed}",
           f"# uniform capacities cpu={cpu} mem={mem}; one client per single-homed access router"]
    for name in cores + aggs + accs:
        out.append(f"node {name} cpu={cpu} mem={mem}")
    out.append("server srv")
    for leaf in leaves:
        out.append(f"client cl_{leaf}")
    for a, b, d in edges:
        out.append(f"edge {a} {b} delay_ms={d}")
    out.append(f"edge srv {cores[0]} delay_ms=5")
    for leaf in leaves:
        out.append(f"edge cl_{leaf} {leaf} delay_ms=1")
    return "\n".join(out) + "\n"


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=3967)
    p.add_argument("--core", type=int, default=8)
    p.add_argument("--agg", type=int, default=24)
    p.add_argument("--access", type=int, default=47)
    p.add_argument("--dual-homed", type=int, default=27)
    p.add_argument("--agg-links", type=int, default=12)
    p.add_argument("--cpu", type=float, default=1.0)
    p.add_argument("--mem", type=float, default=1.0)
    a = p.parse_args()
    sys.stdout.write(build(a.seed, a.core, a.agg, a.access, a.dual_homed, a.agg_links, a.cpu, a.mem))


if __name__ == "__main__":
    main()
