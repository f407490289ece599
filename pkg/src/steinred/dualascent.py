"""Dual ascent on the arborescence encoding and the tests it powers.

``dual_ascent`` runs the classic cut-raising scheme: while some terminal
cannot reach the root through zero-reduced-cost arcs, pick the terminal
whose root-side cut is smallest (ties by vertex id), raise the dual by
the smallest reduced cost on the cut, and grow the terminal's
reachability set along newly zeroed arcs. The result is a valid lower
bound with non-negative reduced costs. Each round zeroes at least one
arc, so there are at most as many rounds as arcs.

``da_reductions`` turns the reduced costs into eliminations: a vertex or
arc whose cheapest root-to-it plus it-to-some-terminal reduced-cost
route, added to the lower bound, exceeds the upper bound cannot be part
of any optimal arborescence; an undirected edge dies when both of its
arcs do. Prize arcs combine with one-directional reach sets: when the
reduced prizes of a vertex and of everything provably tied to it exceed
the gap, the vertex must appear in every optimum and is fixed.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .model import EPS, INF, InfeasibleError, PcInstance
from .sap import SapGraph


@dataclass
class DualAscentResult:
    lower_bound: float
    reduced_costs: list


def dual_ascent(g: SapGraph) -> DualAscentResult:
    rc = list(g.costs)
    lb = 0.0
    root = g.root

    reach: dict = {}  # terminal -> vertices with a zero-rc path to it
    cuts: dict = {}  # terminal -> arcs entering that set, all with rc > 0

    def join(t: int, u: int) -> None:
        queue = [u]
        r, cut = reach[t], cuts[t]
        while queue:
            v = queue.pop()
            if v in r:
                continue
            r.add(v)
            for a in g.in_arcs[v]:
                x = g.tails[a]
                if x not in r:
                    if rc[a] == 0.0:
                        queue.append(x)
                    else:
                        cut.add(a)
            for a in g.out_arcs[v]:
                if g.heads[a] in r:
                    cut.discard(a)

    active = []
    for t in sorted(set(g.terminals)):
        reach[t] = set()
        cuts[t] = set()
        join(t, t)
        if root not in reach[t]:
            active.append(t)

    while active:
        t = min(active, key=lambda x: (len(cuts[x]), x))
        cut = cuts[t]
        if not cut:
            raise InfeasibleError(f"terminal {t} cannot reach the root")
        delta = min(rc[a] for a in cut)
        lb += delta
        zeroed = []
        for a in sorted(cut):
            rc[a] -= delta
            if rc[a] <= EPS:
                rc[a] = 0.0
                zeroed.append(a)
        for a in zeroed:
            for t2 in active:
                if g.heads[a] in reach[t2] and g.tails[a] not in reach[t2]:
                    join(t2, g.tails[a])
        active = [t2 for t2 in active if root not in reach[t2]]
    return DualAscentResult(lower_bound=lb, reduced_costs=rc)


def rc_dist_from_root(g: SapGraph, rc: list) -> list:
    """Cheapest reduced-cost route from the root to every vertex."""
    dist = [INF] * g.n_vertices
    dist[g.root] = 0.0
    heap = [(0.0, g.root)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v] + 1e-15:
            continue
        for a in g.out_arcs[v]:
            w = g.heads[a]
            nd = d + rc[a]
            if nd < dist[w] - 1e-15:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def rc_dist_to_terminals(g: SapGraph, rc: list) -> list:
    """Cheapest reduced-cost route from every vertex to its nearest terminal."""
    dist = [INF] * g.n_vertices
    heap = []
    for t in set(g.terminals):
        dist[t] = 0.0
        heap.append((0.0, t))
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v] + 1e-15:
            continue
        for a in g.in_arcs[v]:
            u = g.tails[a]
            nd = d + rc[a]
            if nd < dist[u] - 1e-15:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return dist


def da_reductions(
    inst: PcInstance,
    g: SapGraph,
    da: DualAscentResult,
    upper_sap: float,
    reach_members: dict = None,
) -> tuple:
    """Eliminations licensed by the reduced costs.

    Returns (edge ids to delete, vertex ids to delete, vertex ids to fix),
    all in original-instance terms. ``reach_members`` maps a positive-prize
    vertex to the set of vertices provably tied to it (see
    ``walks.left_reach``); when given it powers the fixing test.
    """
    rc = da.reduced_costs
    lb = da.lower_bound
    from_root = rc_dist_from_root(g, rc)
    to_term = rc_dist_to_terminals(g, rc)

    del_vertices = []
    sap_of = {}
    for sv in range(g.n_vertices):
        ov = g.to_orig[sv]
        if ov >= 0:
            sap_of[ov] = sv
    for ov in sorted(sap_of):
        sv = sap_of[ov]
        if inst.is_fixed(ov):
            continue
        if lb + from_root[sv] + to_term[sv] > upper_sap + EPS:
            del_vertices.append(ov)

    dead = set(del_vertices)
    del_edges = []
    arc_ok = {}
    for a, e in g.arc_edge.items():
        u, w = g.tails[a], g.heads[a]
        alive = lb + from_root[u] + rc[a] + to_term[w] <= upper_sap + EPS
        if e in arc_ok:
            if not (arc_ok[e] or alive):
                del_edges.append(e)
        else:
            arc_ok[e] = alive
    del_edges = sorted(
        e
        for e in del_edges
        if not (set(inst.ends(e)) & dead)  # subsumed by a vertex deletion
    )

    fix = []
    if reach_members:
        prize_arc_of = {t: a for a, t in g.prize_arc.items()}
        for t in sorted(prize_arc_of):
            if inst.is_fixed(t):
                continue
            total = rc[prize_arc_of[t]]
            for v in reach_members.get(t, ()):
                a = prize_arc_of.get(v)
                if a is not None and not inst.is_fixed(v):
                    total += rc[a]
            if lb + total > upper_sap + EPS:
                fix.append(t)
        # anything tied to a vertex that must appear is itself mandatory
        fixed_now = set(fix) | set(inst.fixed_terminals())
        changed = True
        while changed:
            changed = False
            for t, members in sorted(reach_members.items()):
                if t in fixed_now:
                    continue
                if any(m in fixed_now for m in members):
                    fixed_now.add(t)
                    fix.append(t)
                    changed = True
    return del_edges, sorted(set(del_vertices)), sorted(set(fix))