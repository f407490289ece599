#!/usr/bin/env python3
"""Regenerate tests/data/geo500.stp from scratch.

The benchmark instance is a random geometric graph: 500 points dropped
uniformly in the unit square, edges between pairs closer than a radius
chosen so the expected degree is about 7 (retrying until the graph is
connected).  Edge costs are the euclidean lengths scaled to integers.

Prizes follow a clustered layout: three groups of six high-value
terminals sit near fixed anchor points, and 45 more vertices carry tiny
prizes scattered across the square.  The clustering keeps each group
cheap to connect internally, which is what makes the instance a good
showcase for the reduction engine.

The output is deterministic; run this script only if the data file is
lost, and verify the solve value afterwards (expected optimum: 1865).
"""
from __future__ import annotations

import math
import pathlib
import random

from steinred.model import PcInstance
from steinred.stpio import write_stp

N = 500
TARGET_DEGREE = 7.0
GRAPH_SEED = 7
PRIZE_SEED = 4242
CLUSTER_CENTERS = [(0.2, 0.3), (0.7, 0.2), (0.5, 0.8)]
TERMINALS_PER_CLUSTER = 6
SCATTER_COUNT = 45


def geometric_graph(seed: int, n: int, degree: float) -> tuple[PcInstance, list[tuple[float, float]]]:
    radius = math.sqrt(degree / (n * math.pi))
    tries = 0
    while True:
        rng = random.Random(seed + tries)
        pts = [(rng.random(), rng.random()) for _ in range(n)]
        inst = PcInstance(n)
        for u in range(n):
            for v in range(u + 1, n):
                dx = pts[u][0] - pts[v][0]
                dy = pts[u][1] - pts[v][1]
                d = math.hypot(dx, dy)
                if d <= radius:
                    inst.add_edge(u, v, float(max(1, round(1000 * d))))
        if len(inst.components()) == 1:
            return inst, pts
        tries += 1


def assign_prizes(inst: PcInstance, pts: list[tuple[float, float]]) -> None:
    rng = random.Random(PRIZE_SEED)
    used: set[int] = set()
    for cx, cy in CLUSTER_CENTERS:
        ranked = sorted(
            (v for v in range(N) if v not in used),
            key=lambda v: math.hypot(pts[v][0] - cx, pts[v][1] - cy),
        )
        for v in ranked[:TERMINALS_PER_CLUSTER]:
            inst.prizes[v] = float(rng.randint(800, 1600))
            used.add(v)
    free = [v for v in range(N) if v not in used]
    for v in rng.sample(free, SCATTER_COUNT):
        inst.prizes[v] = float(rng.randint(1, 10))


def main() -> None:
    inst, pts = geometric_graph(GRAPH_SEED, N, TARGET_DEGREE)
    assign_prizes(inst, pts)
    out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "geo500.stp"
    out.write_text(write_stp(inst))
    n_edges = sum(1 for _ in inst.alive_edges())
    print(f"wrote {out} ({N} vertices, {n_edges} edges)")


if __name__ == "__main__":
    main()
