"""Terminal regions and the distance bounds built from their radii.

The vertex set is partitioned into regions, one per effective terminal
(positive prize or fixed). Each region's radius is the smaller of the
terminal's prize (infinite for fixed vertices) and the distance from the
terminal to the nearest vertex outside its region. Any tree connecting
k terminals must, for all but two of them, leave their regions, so the
sum of the (k-2) smallest radii plus restricted distances from a vertex
to its two nearest terminals bounds from below the cost of any solution
routed through that vertex.

The partition starts as the shortest-distance (Voronoi) assignment and
is then improved by moving boundary vertices between adjacent regions
whenever that strictly raises the sum of the smallest radii while
keeping the donor region connected.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .model import EPS, INF, PcInstance, restricted_shortest_paths


def effective_terminals(inst: PcInstance) -> list:
    return sorted(
        v
        for v in inst.alive_vertices()
        if inst.prizes[v] > 0.0 or inst.is_fixed(v)
    )


def _radius_cap(inst: PcInstance, t: int) -> float:
    return INF if inst.is_fixed(t) else inst.prizes[t]


@dataclass
class Regions:
    terminals: list
    owner: dict  # vertex -> owning terminal
    radii: dict  # terminal -> region radius

    def smallest_radii_sum(self, k: int) -> float:
        if k <= 0:
            return 0.0
        ordered = sorted(self.radii.values())
        if k > len(ordered):
            return INF
        return sum(ordered[:k])

    def objective(self) -> float:
        return self.smallest_radii_sum(len(self.terminals) - 2)


def _voronoi(inst: PcInstance, terminals: list) -> dict:
    owner: dict = {}
    dist: dict = {}
    heap = []
    for t in terminals:
        dist[t] = 0.0
        heapq.heappush(heap, (0.0, t, t))
    while heap:
        d, t, v = heapq.heappop(heap)
        if v in owner:
            continue
        owner[v] = t
        for eid, w in inst.neighbors(v):
            nd = d + inst.cost(eid)
            if w not in owner and nd < dist.get(w, INF) - EPS:
                dist[w] = nd
                heapq.heappush(heap, (nd, t, w))
            elif w not in owner and abs(nd - dist.get(w, INF)) <= EPS:
                # equal distance: the smaller terminal id wins via heap order
                heapq.heappush(heap, (nd, t, w))
    return owner


def _region_radius(inst: PcInstance, owner: dict, t: int) -> float:
    cap = _radius_cap(inst, t)
    dist = {t: 0.0}
    heap = [(0.0, t)]
    seen = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in seen:
            continue
        seen.add(v)
        if owner.get(v) != t:
            return min(cap, d)
        if d >= cap:
            return cap
        for eid, w in inst.neighbors(v):
            nd = d + inst.cost(eid)
            if nd < dist.get(w, INF) - EPS:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return cap


def _stays_connected(inst: PcInstance, owner: dict, t: int, removed: int) -> bool:
    size = sum(1 for v, o in owner.items() if o == t) - 1
    if size <= 0:
        return False
    stack = [t]
    seen = {t, removed}
    hit = 1
    while stack:
        v = stack.pop()
        for _, w in inst.neighbors(v):
            if w not in seen and owner.get(w) == t:
                seen.add(w)
                stack.append(w)
                hit += 1
    return hit == size


def build_regions(inst: PcInstance, max_scans: int = None) -> Regions:
    terminals = effective_terminals(inst)
    if not terminals:
        return Regions(terminals=[], owner={}, radii={})
    owner = _voronoi(inst, terminals)
    radii = {t: _region_radius(inst, owner, t) for t in terminals}
    regions = Regions(terminals=terminals, owner=owner, radii=radii)
    if len(terminals) < 3:
        return regions  # the objective has no terms to improve

    keep = len(terminals) - 2
    if max_scans is None:
        max_scans = 2 * max(1, inst.n_alive_vertices())
    terminal_set = set(terminals)
    for _ in range(max_scans):
        moved = False
        for v in sorted(owner):
            if v in terminal_set:
                continue
            src = owner[v]
            targets = sorted(
                {owner[w] for _, w in inst.neighbors(v)} - {src}
            )
            if not targets:
                continue
            if not _stays_connected(inst, owner, src, v):
                continue
            current = regions.smallest_radii_sum(keep)
            for dst in targets:
                owner[v] = dst
                new_src = _region_radius(inst, owner, src)
                new_dst = _region_radius(inst, owner, dst)
                old_src, old_dst = radii[src], radii[dst]
                radii[src], radii[dst] = new_src, new_dst
                if regions.smallest_radii_sum(keep) > current + EPS:
                    moved = True
                    break
                radii[src], radii[dst] = old_src, old_dst
                owner[v] = src
        if not moved:
            break
    return regions


def nearest_terminals(inst: PcInstance, regions: Regions, v: int, k: int) -> list:
    """The k nearest effective terminals from v by restricted distance."""
    if v in set(regions.terminals):
        return []
    terminal_set = set(regions.terminals)
    dist = restricted_shortest_paths(inst, v, terminal_ids=terminal_set)
    ranked = sorted(
        (dist[t], t) for t in regions.terminals if dist[t] < INF
    )
    return ranked[:k]


def vertex_bound(inst: PcInstance, regions: Regions, v: int, k: int = 2) -> float:
    """Lower bound on any solution that routes through ``v`` touching at
    least ``k`` of its incident branches; infinite when fewer than k
    terminals are reachable, which licenses removal outright."""
    s = len(regions.terminals)
    if inst.prizes[v] > 0.0 or inst.is_fixed(v):
        return -INF  # only plain vertices can be priced this way
    near = nearest_terminals(inst, regions, v, k)
    if len(near) < k:
        return INF
    legs = sum(d for d, _ in near)
    return legs + regions.smallest_radii_sum(s - k)
