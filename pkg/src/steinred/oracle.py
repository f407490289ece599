"""Brute-force reference solvers for small instances.

``brute_force_value`` enumerates every vertex subset containing the
fixed vertices (at most 2**20 of them), prices each as induced minimum
spanning tree plus foregone prizes plus offset, and returns the best.
The inner loop is a compiled bitmask kernel; Kruskal doubles as the
connectivity check. ``enumerate_optima`` lists all subsets within
tolerance of that best. ``sap_optimum_exact`` is the directed
counterpart for the arborescence encodings, a subset DP over terminals,
intended for graphs with only a handful of terminals.
"""

from __future__ import annotations

import heapq
import math

import numpy as np
from numba import njit

from .model import INF, PcInstance, SteinerTree, ValidationError, tree_from_edges

MAX_VERTICES = 20


@njit(cache=True)
def _scan_masks(n, eu, ev, ec, prizes, required, collect, bound, out):
    """One pass over all vertex subsets.

    With collect=False returns (best cost, best mask, 0); with
    collect=True fills ``out`` with every mask costing <= bound + 1e-9
    and returns (bound, 0, count). Costs exclude the instance offset.
    """
    best_cost = np.inf
    best_mask = 0
    count = 0
    parent = np.empty(n, np.int64)
    m_edges = eu.shape[0]
    for mask in range(1, 1 << n):
        if (mask & required) != required:
            continue
        k = 0
        mm = mask
        while mm:
            k += 1
            mm &= mm - 1
        for i in range(n):
            parent[i] = i
        comps = k
        cost = 0.0
        for j in range(m_edges):
            if comps == 1:
                break
            u = eu[j]
            v = ev[j]
            if ((mask >> u) & 1) == 0 or ((mask >> v) & 1) == 0:
                continue
            ru = u
            while parent[ru] != ru:
                ru = parent[ru]
            rv = v
            while parent[rv] != rv:
                rv = parent[rv]
            if ru == rv:
                continue
            parent[ru] = rv
            cost += ec[j]
            comps -= 1
        if comps != 1:
            continue
        for vtx in range(n):
            if ((mask >> vtx) & 1) == 0:
                cost += prizes[vtx]
        if collect:
            if cost <= bound + 1e-9:
                if count < out.shape[0]:
                    out[count] = mask
                count += 1
        elif cost < best_cost - 1e-12:
            best_cost = cost
            best_mask = mask
    return best_cost, best_mask, count


def _compact(inst: PcInstance):
    alive = inst.alive_vertices()
    n = len(alive)
    if n == 0:
        raise ValidationError("instance has no vertices")
    if n > MAX_VERTICES:
        raise ValidationError(f"{n} vertices is too large to enumerate")
    pos = {v: i for i, v in enumerate(alive)}
    edges = sorted(inst.alive_edges(), key=lambda e: (inst.cost(e), e))
    eu = np.array([pos[inst.ends(e)[0]] for e in edges], dtype=np.int64)
    ev = np.array([pos[inst.ends(e)[1]] for e in edges], dtype=np.int64)
    ec = np.array([inst.cost(e) for e in edges], dtype=np.float64)
    prizes = np.array([inst.prizes[v] for v in alive], dtype=np.float64)
    required = 0
    for v in inst.fixed_terminals():
        required |= 1 << pos[v]
    return alive, n, eu, ev, ec, prizes, required


def brute_force_value(inst: PcInstance) -> float:
    alive, n, eu, ev, ec, prizes, required = _compact(inst)
    zero = np.zeros(1, dtype=np.int64)
    cost, _, _ = _scan_masks(n, eu, ev, ec, prizes, required, False, 0.0, zero)
    if math.isinf(cost):
        raise ValidationError("no feasible vertex subset (fixed vertices split)")
    return cost + inst.offset


def enumerate_optima(inst: PcInstance, tol: float = 1e-9):
    """All optimal vertex subsets, as frozensets of original vertex ids."""
    alive, n, eu, ev, ec, prizes, required = _compact(inst)
    zero = np.zeros(1, dtype=np.int64)
    best, _, _ = _scan_masks(n, eu, ev, ec, prizes, required, False, 0.0, zero)
    if math.isinf(best):
        raise ValidationError("no feasible vertex subset (fixed vertices split)")
    out = np.zeros(1 << min(n, 16), dtype=np.int64)
    _, _, count = _scan_masks(n, eu, ev, ec, prizes, required, True, best + tol, out)
    if count > out.shape[0]:
        raise ValidationError("too many optima to enumerate")
    optima = []
    for mask in out[:count]:
        optima.append(frozenset(alive[i] for i in range(n) if (int(mask) >> i) & 1))
    return optima


def brute_force_tree(inst: PcInstance):
    """(optimal cost, one optimal tree), deterministically the lowest mask."""
    from .model import mst_of_induced

    alive, n, eu, ev, ec, prizes, required = _compact(inst)
    zero = np.zeros(1, dtype=np.int64)
    cost, mask, _ = _scan_masks(n, eu, ev, ec, prizes, required, False, 0.0, zero)
    if math.isinf(cost):
        raise ValidationError("no feasible vertex subset (fixed vertices split)")
    chosen = [alive[i] for i in range(n) if (int(mask) >> i) & 1]
    edges = mst_of_induced(inst, chosen)
    tree = tree_from_edges(inst, edges, extra_vertices=chosen)
    return cost + inst.offset, tree


def _reverse_dijkstra(g, seeds):
    """Min over u of seeds[u] + cost of a directed path v->u, for all v."""
    dist = list(seeds)
    heap = [(d, v) for v, d in enumerate(dist) if d < INF]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v] + 1e-15:
            continue
        for a in g.in_arcs[v]:
            u = g.tails[a]
            nd = d + g.costs[a]
            if nd < dist[u] - 1e-15:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return dist


def sap_optimum_exact(g) -> float:
    """Optimal arborescence value by DP over terminal subsets."""
    terms = sorted(set(g.terminals))
    k = len(terms)
    if k == 0:
        return 0.0
    if k > 14:
        raise ValidationError(f"{k} terminals is too large for the exact DP")
    n = g.n_vertices
    dp = [None] * (1 << k)
    for i, t in enumerate(terms):
        seeds = [INF] * n
        seeds[t] = 0.0
        dp[1 << i] = _reverse_dijkstra(g, seeds)
    for s_mask in range(1, 1 << k):
        if dp[s_mask] is not None:
            continue
        val = [INF] * n
        sub = (s_mask - 1) & s_mask
        while sub:
            rest = s_mask & ~sub
            if sub < rest:
                a, b = dp[sub], dp[rest]
                for v in range(n):
                    c = a[v] + b[v]
                    if c < val[v]:
                        val[v] = c
            sub = (sub - 1) & s_mask
        dp[s_mask] = _reverse_dijkstra(g, val)
    answer = dp[(1 << k) - 1][g.root]
    if answer >= INF:
        raise ValidationError("some terminal is unreachable from the root")
    return answer
